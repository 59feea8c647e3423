"""Filtered link-prediction ranking and metrics."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graph import TripleStore, TypeConstraints
from .model import EmbeddingTable, query_vectors

TIES = ("average", "optimistic", "pessimistic")
DIRECTIONS = ("tail", "head")
HITS_AT = (1, 3, 10)


def rank_from_scores(scores, true_index, excluded, ties="average") -> float:
    """Rank of ``scores[true_index]`` among the entries not in ``excluded``.

    ``rank = 1 + #strictly higher + tie share``; the tie share is 0, all,
    or half of the equal-scoring competitors for optimistic, pessimistic and
    average ranking respectively.
    """
    if ties not in TIES:
        raise ValueError(f"unknown tie convention {ties!r}")
    target = scores[true_index]
    keep = np.ones(len(scores), dtype=bool)
    keep[excluded] = False
    keep[true_index] = False
    s = scores[keep]
    higher = int(np.count_nonzero(s > target))
    if ties == "optimistic":
        return float(1 + higher)
    equal = int(np.count_nonzero(s == target))
    if ties == "pessimistic":
        return float(1 + higher + equal)
    return 1.0 + higher + equal / 2.0


def _resolve_constraints(store, type_constraints):
    if type_constraints is True:
        return store.constraints
    if type_constraints is False or type_constraints is None:
        return None
    if isinstance(type_constraints, TypeConstraints):
        return type_constraints
    raise TypeError("type_constraints must be a bool or TypeConstraints")


def _query_plan(store: TripleStore, triples, direction):
    """(fixed entity, relation used for scoring, query direction, true answer)."""
    h, r, t = triples[:, 0], triples[:, 1], triples[:, 2]
    if direction == "tail":
        return h, r, "tail", t
    if store.reciprocal:
        return t, r + store.n_base_relations, "tail", h
    return t, r, "head", h


def _excluded(store, triple, direction, constraints, n_entities):
    h, r, t = (int(x) for x in triple)
    known = store.known_tails(h, r) if direction == "tail" else store.known_heads(r, t)
    if constraints is None:
        return known
    allowed = np.zeros(n_entities, dtype=bool)
    allowed[constraints.candidates(r, direction)] = True
    outside = np.flatnonzero(~allowed)
    return np.union1d(known, outside)


def filtered_rank(
    table: EmbeddingTable,
    store: TripleStore,
    triple,
    direction: str,
    type_constraints=None,
    ties: str = "average",
) -> float:
    """Filtered rank of the true entity for one ``(h, r, t)`` query.

    Competitors forming any observed triple are dropped; under type
    constraints so are entities never seen in that slot of the relation
    (the true entity always stays).
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"invalid direction {direction!r}")
    triple = np.asarray(triple, dtype=np.int64).reshape(1, 3)
    fixed, rel, qdir, true = _query_plan(store, triple, direction)
    q = query_vectors(table, fixed, rel, qdir)[:, 0]
    scores = np.einsum("ck,cnk->n", q, table.entities)
    constraints = _resolve_constraints(store, type_constraints)
    excluded = _excluded(store, triple[0], direction, constraints, table.n_entities)
    return rank_from_scores(scores, int(true[0]), excluded, ties)


@dataclass
class RankReport:
    """Per-query filtered ranks (tail queries first, then head queries)."""

    triples: np.ndarray
    directions: np.ndarray
    ranks: np.ndarray
    split: str = "test"

    def __post_init__(self):
        if len(self.ranks) == 0:
            raise ValueError("empty report")

    @property
    def n_queries(self) -> int:
        return len(self.ranks)

    @property
    def mr(self) -> float:
        return float(np.mean(self.ranks))

    @property
    def mrr(self) -> float:
        return float(np.mean(1.0 / self.ranks))

    def hits(self, n: int) -> float:
        return float(np.mean(self.ranks <= n))

    @property
    def hits_at(self) -> dict:
        return {n: self.hits(n) for n in HITS_AT}

    @property
    def per_relation_mrr(self) -> dict:
        rels = self.triples[:, 1]
        return {
            int(r): float(np.mean(1.0 / self.ranks[rels == r])) for r in np.unique(rels)
        }

    def metrics(self) -> dict:
        return {
            "MR": self.mr,
            "MRR": self.mrr,
            "Hits@10": self.hits(10),
            "Hits@3": self.hits(3),
            "Hits@1": self.hits(1),
        }

    def format(self, per_relation: bool = False, relation_names=None) -> str:
        lines = [f"split\t{self.split}", f"queries\t{self.n_queries}"]
        lines += [f"{key}\t{value:.10f}" for key, value in self.metrics().items()]
        if per_relation:
            lines.append("relation\tMRR\tqueries")
            rels = self.triples[:, 1]
            for r, value in self.per_relation_mrr.items():
                name = relation_names[r] if relation_names is not None else str(r)
                lines.append(f"{name}\t{value:.10f}\t{int(np.sum(rels == r))}")
        return "\n".join(lines)


def _rank_chunk(table, store, triples, direction, constraints, ties, entity_matrix):
    fixed, rel, qdir, true = _query_plan(store, triples, direction)
    q = query_vectors(table, fixed, rel, qdir)  # (ncomp, B, k)
    flat_q = q.transpose(1, 0, 2).reshape(len(triples), -1)
    scores = flat_q @ entity_matrix.T
    out = np.empty(len(triples))
    for i, triple in enumerate(triples):
        excluded = _excluded(store, triple, direction, constraints, table.n_entities)
        out[i] = rank_from_scores(scores[i], int(true[i]), excluded, ties)
    return out


def evaluate(
    table: EmbeddingTable,
    store: TripleStore,
    split: str = "test",
    type_constraints=None,
    ties: str = "average",
    workers: int = 1,
    chunk_size: int = 256,
) -> RankReport:
    """Rank every triple of ``split`` as a tail query and as a head query."""
    if ties not in TIES:
        raise ValueError(f"unknown tie convention {ties!r}")
    triples = store.split(split)
    if len(triples) == 0:
        raise ValueError(f"split {split!r} is empty")
    constraints = _resolve_constraints(store, type_constraints)
    entity_matrix = table.entities.transpose(1, 0, 2).reshape(table.n_entities, -1)
    jobs = [
        (triples[i : i + chunk_size], direction)
        for direction in DIRECTIONS
        for i in range(0, len(triples), chunk_size)
    ]

    def run(job):
        return _rank_chunk(table, store, job[0], job[1], constraints, ties, entity_matrix)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(job) for job in jobs]
    return RankReport(
        triples=np.concatenate([triples, triples]),
        directions=np.repeat(np.array(DIRECTIONS), len(triples)),
        ranks=np.concatenate(parts),
        split=split,
    )


def parameter_count(sizes, config) -> int:
    """Free parameters: ``(N + M_eff) * k * ncomp``.

    ``sizes`` is the un-augmented vocabulary (or anything with
    ``n_entities``/``n_relations``). ``M_eff`` doubles under reciprocal
    learning and again for DualRotation's extra tail rotation.
    """
    relations = sizes.n_relations
    if config.reciprocal:
        relations *= 2
    if config.variant.has_tail_relation:
        relations *= 2
    return (sizes.n_entities + relations) * config.k * config.variant.ncomp
