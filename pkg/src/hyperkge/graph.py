"""Triple storage: vocabulary, splits, filter index and relation statistics."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import AlreadyAugmentedError, DataError, MalformedLineError

logger = logging.getLogger(__name__)

SPLITS = ("train", "valid", "test")
INVERSE_SUFFIX = "__inverse"


class Vocabulary:
    """Dense name <-> id bijections for entities and relations."""

    def __init__(self, entities=(), relations=()):
        self.entities: list[str] = []
        self.relations: list[str] = []
        self._ent: dict[str, int] = {}
        self._rel: dict[str, int] = {}
        for e in entities:
            self.entity_id(e, add=True)
        for r in relations:
            self.relation_id(r, add=True)

    @staticmethod
    def _lookup(table, names, name, add):
        try:
            return table[name]
        except KeyError:
            if not add:
                raise
        table[name] = len(names)
        names.append(name)
        return table[name]

    def entity_id(self, name: str, add: bool = False) -> int:
        return self._lookup(self._ent, self.entities, name, add)

    def relation_id(self, name: str, add: bool = False) -> int:
        return self._lookup(self._rel, self.relations, name, add)

    @property
    def n_entities(self) -> int:
        return len(self.entities)

    @property
    def n_relations(self) -> int:
        return len(self.relations)

    def encode(self, h: str, r: str, t: str) -> tuple[int, int, int]:
        return self._ent[h], self._rel[r], self._ent[t]

    def decode(self, triple) -> tuple[str, str, str]:
        h, r, t = (int(x) for x in triple)
        return self.entities[h], self.relations[r], self.entities[t]

    def dump(self, entity_path, relation_path):
        for path, names in ((entity_path, self.entities), (relation_path, self.relations)):
            with open(path, "w", encoding="utf-8") as f:
                for i, name in enumerate(names):
                    f.write(f"{i}\t{name}\n")

    def __eq__(self, other):
        return (
            isinstance(other, Vocabulary)
            and self.entities == other.entities
            and self.relations == other.relations
        )

    def __repr__(self):
        return f"Vocabulary(N={self.n_entities}, M={self.n_relations})"


@dataclass(frozen=True)
class LoadSummary:
    unseen_entities: dict[str, int] = field(default_factory=dict)
    unseen_relations: dict[str, int] = field(default_factory=dict)
    relations_missing_from_train: tuple[int, ...] = ()

    def lines(self):
        for split, n in self.unseen_entities.items():
            if n:
                yield f"{n} entities first seen in {split}"
        for split, n in self.unseen_relations.items():
            if n:
                yield f"{n} relations first seen in {split}"
        if self.relations_missing_from_train:
            yield f"{len(self.relations_missing_from_train)} relations absent from train"


def _as_triples(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, 3), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise DataError(f"triples must have shape (n, 3), got {arr.shape}")
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TripleStore:
    """Integer-encoded splits plus the indexes derived from them.

    ``n_base_relations`` is the relation count before reciprocal
    augmentation; inverse relation ``r + n_base_relations`` mirrors ``r``.
    """

    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray
    n_entities: int
    n_relations: int
    n_base_relations: int | None = None
    reciprocal: bool = False
    summary: LoadSummary = field(default_factory=LoadSummary)

    def __post_init__(self):
        for name in SPLITS:
            object.__setattr__(self, name, _as_triples(getattr(self, name)))
        if self.n_base_relations is None:
            object.__setattr__(self, "n_base_relations", self.n_relations)
        for name in SPLITS:
            arr = getattr(self, name)
            if len(arr) == 0:
                continue
            if arr.min() < 0 or arr[:, [0, 2]].max() >= self.n_entities or arr[:, 1].max() >= self.n_relations:
                raise DataError(f"{name} split has ids out of range (N={self.n_entities}, M={self.n_relations})")

    def split(self, name: str) -> np.ndarray:
        if name not in SPLITS:
            raise ValueError(f"unknown split {name!r}")
        return getattr(self, name)

    @cached_property
    def filter_index(self) -> frozenset:
        """Every observed triple across the three splits."""
        return frozenset(
            map(tuple, np.concatenate([self.train, self.valid, self.test]).tolist())
        )

    @cached_property
    def _known(self):
        tails = defaultdict(set)
        heads = defaultdict(set)
        for h, r, t in self.filter_index:
            tails[h, r].add(t)
            heads[r, t].add(h)
        tails = {key: np.fromiter(sorted(v), dtype=np.int64) for key, v in tails.items()}
        heads = {key: np.fromiter(sorted(v), dtype=np.int64) for key, v in heads.items()}
        return tails, heads

    def known_tails(self, h: int, r: int) -> np.ndarray:
        return self._known[0].get((int(h), int(r)), _EMPTY)

    def known_heads(self, r: int, t: int) -> np.ndarray:
        return self._known[1].get((int(r), int(t)), _EMPTY)

    @cached_property
    def bernoulli(self) -> np.ndarray:
        return bernoulli_stats(self)

    @cached_property
    def constraints(self) -> TypeConstraints:
        return type_constraints(self)


_EMPTY = np.zeros(0, dtype=np.int64)
_EMPTY.setflags(write=False)


def _read_split(path, vocab, split, counts):
    rows = []
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing file: {path}")
    n_ent, n_rel = vocab.n_entities, vocab.n_relations
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise MalformedLineError(path, lineno, len(parts))
            h, r, t = parts
            rows.append(
                (vocab.entity_id(h, add=True), vocab.relation_id(r, add=True), vocab.entity_id(t, add=True))
            )
    counts[0][split] = vocab.n_entities - n_ent
    counts[1][split] = vocab.n_relations - n_rel
    return rows


def load_tsv(train_path, valid_path, test_path) -> tuple[Vocabulary, TripleStore]:
    """Load ``head<TAB>relation<TAB>tail`` files into a vocabulary and store.

    Ids are assigned in first-seen order over train, valid, test.
    """
    vocab = Vocabulary()
    counts = ({}, {})
    splits = [
        _read_split(p, vocab, s, counts)
        for p, s in zip((train_path, valid_path, test_path), SPLITS)
    ]
    train = _as_triples(splits[0])
    in_train = set(np.unique(train[:, 1]).tolist()) if len(train) else set()
    missing = tuple(r for r in range(vocab.n_relations) if r not in in_train)
    summary = LoadSummary(
        unseen_entities={s: counts[0][s] for s in SPLITS[1:]},
        unseen_relations={s: counts[1][s] for s in SPLITS[1:]},
        relations_missing_from_train=missing,
    )
    store = TripleStore(
        train, splits[1], splits[2], vocab.n_entities, vocab.n_relations, summary=summary
    )
    for line in summary.lines():
        logger.info(line)
    return vocab, store


def load_dir(path) -> tuple[Vocabulary, TripleStore]:
    path = Path(path)
    return load_tsv(*(path / f"{s}.txt" for s in SPLITS))


def add_reciprocals(store: TripleStore, vocab: Vocabulary | None = None):
    """Append an inverse relation per relation and reversed train triples.

    Returns ``(vocab, store)``; ``vocab`` is ``None`` if none was given.
    """
    if store.reciprocal:
        raise AlreadyAugmentedError("store already has reciprocal relations")
    m = store.n_relations
    rev = store.train[:, ::-1] + np.array([0, m, 0])
    new_store = replace(
        store,
        train=np.concatenate([store.train, rev]),
        n_relations=2 * m,
        n_base_relations=m,
        reciprocal=True,
    )
    new_vocab = None
    if vocab is not None:
        new_vocab = Vocabulary(vocab.entities, vocab.relations + [r + INVERSE_SUFFIX for r in vocab.relations])
    return new_vocab, new_store


def bernoulli_stats(store: TripleStore) -> np.ndarray:
    """Per-relation ``(tph, hpt)`` on the train split, shape ``(M, 2)``.

    ``tph`` averages the number of distinct tails over distinct heads,
    ``hpt`` the number of distinct heads over distinct tails. Relations
    absent from train get ``(0, 0)``.
    """
    stats = np.zeros((store.n_relations, 2))
    train = np.unique(store.train, axis=0) if len(store.train) else store.train
    for r in np.unique(train[:, 1]):
        rows = train[train[:, 1] == r]
        n = len(rows)
        stats[r, 0] = n / len(np.unique(rows[:, 0]))
        stats[r, 1] = n / len(np.unique(rows[:, 2]))
    return stats


@dataclass(frozen=True)
class TypeConstraints:
    heads: tuple[np.ndarray, ...]
    tails: tuple[np.ndarray, ...]
    empty_relations: tuple[int, ...]

    def candidates(self, r: int, direction: str) -> np.ndarray:
        if direction == "head":
            return self.heads[r]
        if direction == "tail":
            return self.tails[r]
        raise ValueError(f"invalid direction {direction!r}")


def type_constraints(store: TripleStore) -> TypeConstraints:
    """Entities seen as head / tail of each relation in the train split."""
    heads, tails, empty = [], [], []
    for r in range(store.n_relations):
        rows = store.train[store.train[:, 1] == r]
        heads.append(np.unique(rows[:, 0]))
        tails.append(np.unique(rows[:, 2]))
        if len(rows) == 0:
            empty.append(r)
    if empty:
        logger.info("%d relations have no train triples; empty type constraints", len(empty))
    return TypeConstraints(tuple(heads), tuple(tails), tuple(empty))
