"""Small generated graphs with known relation patterns.

``pattern_graph`` builds one symmetric relation (a perfect matching), one
antisymmetric relation (edges of a random DAG), and an inverse pair
(``forward(x, y)`` iff ``backward(y, x)``). Held-out triples are chosen so
that their pattern mate stays in train: the reverse of a symmetric edge,
or the partner of an inverse edge.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .graph import TripleStore, Vocabulary

RELATIONS = ("symmetric", "antisymmetric", "forward", "backward")


def pattern_graph(n_entities=60, n_edges=60, holdout=0.1, seed=0, valid_fraction=0.0):
    """Return ``(vocab, store)`` for a pattern KG.

    ``holdout`` is the fraction of all true triples moved to test;
    ``valid_fraction`` (optional) moves a further share to valid.
    """
    if n_entities % 2:
        raise ValueError("n_entities must be even")
    rng = np.random.default_rng(seed)
    sym, anti, fwd, bwd = range(4)
    perm = rng.permutation(n_entities)
    pairs = perm.reshape(-1, 2)
    sym_triples = [(a, sym, b) for a, b in pairs] + [(b, sym, a) for a, b in pairs]

    order = rng.permutation(n_entities)
    rank = np.empty(n_entities, dtype=int)
    rank[order] = np.arange(n_entities)
    anti_edges = set()
    while len(anti_edges) < n_edges:
        a, b = rng.choice(n_entities, size=2, replace=False)
        if rank[a] > rank[b]:
            a, b = b, a
        anti_edges.add((int(a), int(b)))
    anti_triples = [(a, anti, b) for a, b in sorted(anti_edges)]

    inv_edges = set()
    while len(inv_edges) < n_edges:
        a, b = rng.choice(n_entities, size=2, replace=False)
        inv_edges.add((int(a), int(b)))
    inv_edges = sorted(inv_edges)
    fwd_triples = [(a, fwd, b) for a, b in inv_edges]
    bwd_triples = [(b, bwd, a) for a, b in inv_edges]

    total = len(sym_triples) + len(anti_triples) + len(fwd_triples) + len(bwd_triples)
    n_test = int(round(holdout * total))
    n_valid = int(round(valid_fraction * total))
    n_held = n_test + n_valid
    n_sym = min(n_held // 2, len(pairs))
    n_inv = n_held - n_sym
    if n_inv > len(inv_edges):
        raise ValueError("holdout too large for the generated graph")

    sym_pick = rng.choice(len(pairs), size=n_sym, replace=False)
    held = [sym_triples[i] for i in sym_pick]  # first direction of chosen pairs
    inv_pick = rng.choice(len(inv_edges), size=n_inv, replace=False)
    for j, i in enumerate(inv_pick):
        held.append(fwd_triples[i] if j % 2 == 0 else bwd_triples[i])
    held_set = set(held)
    all_triples = sym_triples + anti_triples + fwd_triples + bwd_triples
    train = [t for t in all_triples if t not in held_set]
    order = rng.permutation(len(held))
    held = [held[i] for i in order]
    test, valid = held[:n_test], held[n_test:]

    vocab = Vocabulary([f"e{i}" for i in range(n_entities)], RELATIONS)
    store = TripleStore(np.array(train), np.array(valid).reshape(-1, 3), np.array(test), n_entities, len(RELATIONS))
    return vocab, store


def write_tsv(directory, vocab: Vocabulary, store: TripleStore) -> Path:
    """Write ``{train,valid,test}.txt`` with entity and relation names."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for split in ("train", "valid", "test"):
        with open(directory / f"{split}.txt", "w", encoding="utf-8") as f:
            for triple in store.split(split):
                f.write("\t".join(vocab.decode(triple)) + "\n")
    return directory
