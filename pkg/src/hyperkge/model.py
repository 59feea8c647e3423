"""Embedding tables and scoring functions.

All variants reduce to bilinear forms over the hypercomplex product, so the
gradients below are written with the composition-algebra adjoint identities

    <x y, z> = <x, z conj(y)> = <y, conj(x) z>

which hold for both quaternions and octonions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .hypercomplex import DEFAULT_EPS, conj, multiply, unit


class ModelVariant(str, enum.Enum):
    QUATE = "QuatE"
    QUATE_RAW = "QuatERaw"
    WEIGHTED = "WeightedProduct"
    DUAL = "DualRotation"
    COMPLEX = "ComplExDegenerate"
    DISTMULT = "DistMultDegenerate"
    OCTONION = "OctonionE"

    @property
    def tag(self) -> int:
        return list(ModelVariant).index(self)

    @classmethod
    def from_tag(cls, tag: int) -> ModelVariant:
        return list(cls)[tag]

    @property
    def ncomp(self) -> int:
        return 8 if self is ModelVariant.OCTONION else 4

    @property
    def normalizes(self) -> bool:
        return self in (ModelVariant.QUATE, ModelVariant.DUAL, ModelVariant.OCTONION)

    @property
    def active_components(self) -> tuple[int, ...]:
        if self is ModelVariant.COMPLEX:
            return (0, 1)
        if self is ModelVariant.DISTMULT:
            return (0,)
        return tuple(range(self.ncomp))

    @property
    def has_tail_relation(self) -> bool:
        return self is ModelVariant.DUAL

    @property
    def form(self) -> str:
        if self is ModelVariant.WEIGHTED:
            return "weighted"
        if self is ModelVariant.DUAL:
            return "dual"
        return "rotate"


FIELDS = ("entities", "relations", "tail_relations")


@dataclass(eq=False)
class EmbeddingTable:
    """Entity and relation embeddings, each ``(ncomp, rows, k)`` float64.

    Components of degenerate variants that are structurally absent
    (``j, k`` for ComplEx, all imaginary parts for DistMult) are zeroed here
    and never receive gradient.
    """

    entities: np.ndarray
    relations: np.ndarray
    variant: ModelVariant = ModelVariant.QUATE
    tail_relations: np.ndarray | None = None

    def __post_init__(self):
        self.variant = ModelVariant(self.variant)
        D = self.variant.ncomp
        self.entities = np.ascontiguousarray(self.entities, dtype=np.float64)
        self.relations = np.ascontiguousarray(self.relations, dtype=np.float64)
        if self.entities.ndim != 3 or self.entities.shape[0] != D:
            raise ValueError(f"entities must be ({D}, N, k), got {self.entities.shape}")
        if self.relations.ndim != 3 or self.relations.shape[0] != D or self.relations.shape[2] != self.k:
            raise ValueError(f"relations must be ({D}, M, {self.k}), got {self.relations.shape}")
        if self.k < 1:
            raise ValueError("embedding dimension must be >= 1")
        if self.variant.has_tail_relation:
            if self.tail_relations is None:
                raise ValueError(f"{self.variant.value} needs tail_relations")
            self.tail_relations = np.ascontiguousarray(self.tail_relations, dtype=np.float64)
            if self.tail_relations.shape != self.relations.shape:
                raise ValueError("tail_relations must match relations shape")
        elif self.tail_relations is not None:
            raise ValueError(f"{self.variant.value} has no tail_relations")
        inactive = [c for c in range(D) if c not in self.variant.active_components]
        for arr in self.arrays().values():
            if not np.all(np.isfinite(arr)):
                raise ValueError("embedding table has non-finite coordinates")
            arr[inactive] = 0.0

    @property
    def k(self) -> int:
        return self.entities.shape[2]

    @property
    def ncomp(self) -> int:
        return self.variant.ncomp

    @property
    def n_entities(self) -> int:
        return self.entities.shape[1]

    @property
    def n_relations(self) -> int:
        return self.relations.shape[1]

    def arrays(self) -> dict[str, np.ndarray]:
        out = {"entities": self.entities, "relations": self.relations}
        if self.tail_relations is not None:
            out["tail_relations"] = self.tail_relations
        return out

    def copy(self) -> EmbeddingTable:
        return EmbeddingTable(
            self.entities.copy(),
            self.relations.copy(),
            self.variant,
            None if self.tail_relations is None else self.tail_relations.copy(),
        )

    def equals(self, other: EmbeddingTable) -> bool:
        a, b = self.arrays(), other.arrays()
        return self.variant == other.variant and a.keys() == b.keys() and all(
            np.array_equal(a[key], b[key]) for key in a
        )

    @classmethod
    def zeros(cls, variant, n_entities, n_relations, k) -> EmbeddingTable:
        variant = ModelVariant(variant)
        D = variant.ncomp
        tail = np.zeros((D, n_relations, k)) if variant.has_tail_relation else None
        return cls(np.zeros((D, n_entities, k)), np.zeros((D, n_relations, k)), variant, tail)


def _check_ids(table: EmbeddingTable, triples: np.ndarray):
    if len(triples) == 0:
        return
    if (
        triples.min() < 0
        or triples[:, [0, 2]].max() >= table.n_entities
        or triples[:, 1].max() >= table.n_relations
    ):
        raise IndexError(
            f"triple ids out of range (N={table.n_entities}, M={table.n_relations})"
        )


def _as_batch(triples) -> np.ndarray:
    arr = np.asarray(triples, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr


def _gather(table, triples):
    h = np.ascontiguousarray(table.entities[:, triples[:, 0]])
    w = np.ascontiguousarray(table.relations[:, triples[:, 1]])
    t = np.ascontiguousarray(table.entities[:, triples[:, 2]])
    v = None
    if table.tail_relations is not None:
        v = np.ascontiguousarray(table.tail_relations[:, triples[:, 1]])
    return h, w, t, v


def _uses_kernel(variant: ModelVariant) -> bool:
    return variant.form == "rotate" and variant.ncomp == 4


def score_batch(table: EmbeddingTable, triples, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Scores for an ``(B, 3)`` array of ``(h, r, t)`` ids."""
    triples = _as_batch(triples)
    _check_ids(table, triples)
    h, w, t, v = _gather(table, triples)
    variant = table.variant
    if _uses_kernel(variant):
        return kernels.rotate_score(h, w, t, variant.normalizes, eps)
    if variant.form == "rotate":
        wn = unit(w, eps)[0] if variant.normalizes else w
        return np.einsum("cbk,cbk->b", multiply(h, wn), t)
    if variant.form == "weighted":
        return np.einsum("cbk,cbk->b", w, multiply(h, t))
    rot_h = multiply(h, unit(w, eps)[0])
    rot_t = multiply(t, unit(v, eps)[0])
    return np.einsum("cbk,cbk->b", rot_h, rot_t)


def score_triple(table: EmbeddingTable, triple, eps: float = DEFAULT_EPS) -> float:
    return float(score_batch(table, triple, eps)[0])


def _unit_backward(g, wn, n):
    return (g - wn * np.sum(wn * g, axis=0)) / n


def score_grad_batch(table: EmbeddingTable, triples, coef, eps: float = DEFAULT_EPS):
    """Gradients of ``sum_b coef[b] * score(triples[b])`` per role.

    Returns a dict with ``head``, ``relation``, ``tail`` (and ``tail_relation``
    for DualRotation), each ``(ncomp, B, k)``: row ``b`` is the gradient with
    respect to the embedding occupying that role in triple ``b``.
    """
    triples = _as_batch(triples)
    _check_ids(table, triples)
    coef = np.asarray(coef, dtype=np.float64).reshape(len(triples))
    h, w, t, v = _gather(table, triples)
    variant = table.variant
    c = coef[None, :, None]
    grads = {}
    if _uses_kernel(variant):
        gh, gw, gt = kernels.rotate_grad(h, w, t, coef, variant.normalizes, eps)
        grads = {"head": gh, "relation": gw, "tail": gt}
    elif variant.form == "rotate":
        if variant.normalizes:
            wn, n = unit(w, eps)
        else:
            wn = w
        grads["head"] = c * multiply(t, conj(wn))
        grads["tail"] = c * multiply(h, wn)
        gw = c * multiply(conj(h), t)
        grads["relation"] = _unit_backward(gw, wn, n) if variant.normalizes else gw
    elif variant.form == "weighted":
        grads["head"] = c * multiply(w, conj(t))
        grads["relation"] = c * multiply(h, t)
        grads["tail"] = c * multiply(conj(h), w)
    else:
        wn, nw = unit(w, eps)
        vn, nv = unit(v, eps)
        ga = c * multiply(t, vn)  # d/d(h wn)
        gb = c * multiply(h, wn)  # d/d(t vn)
        grads["head"] = multiply(ga, conj(wn))
        grads["relation"] = _unit_backward(multiply(conj(h), ga), wn, nw)
        grads["tail"] = multiply(gb, conj(vn))
        grads["tail_relation"] = _unit_backward(multiply(conj(t), gb), vn, nv)
    inactive = [i for i in range(variant.ncomp) if i not in variant.active_components]
    if inactive:
        for g in grads.values():
            g[inactive] = 0.0
    return grads


def score_gradients(table: EmbeddingTable, triple, eps: float = DEFAULT_EPS) -> dict:
    """Analytic gradient of one triple's score; ``(ncomp, k)`` per role."""
    grads = score_grad_batch(table, triple, [1.0], eps)
    return {key: g[:, 0] for key, g in grads.items()}


def query_vectors(table: EmbeddingTable, fixed, relations, direction: str, eps: float = DEFAULT_EPS):
    """Per-query vectors ``q`` with ``score = <q, candidate>``, shape ``(ncomp, B, k)``.

    ``direction="tail"`` fixes heads and ranks tails; ``"head"`` fixes tails.
    Every variant's score is linear in the free entity, so the candidate
    scores reduce to one dot product each.
    """
    fixed = np.atleast_1d(np.asarray(fixed, dtype=np.int64))
    relations = np.atleast_1d(np.asarray(relations, dtype=np.int64))
    if direction not in ("head", "tail"):
        raise ValueError(f"invalid direction {direction!r}")
    if fixed.min(initial=0) < 0 or fixed.max(initial=0) >= table.n_entities:
        raise IndexError("entity id out of range")
    if relations.min(initial=0) < 0 or relations.max(initial=0) >= table.n_relations:
        raise IndexError("relation id out of range")
    e = table.entities[:, fixed]
    w = table.relations[:, relations]
    variant = table.variant
    if variant.form == "rotate":
        wn = unit(w, eps)[0] if variant.normalizes else w
        return multiply(e, wn) if direction == "tail" else multiply(e, conj(wn))
    if variant.form == "weighted":
        return multiply(conj(e), w) if direction == "tail" else multiply(w, conj(e))
    wn = unit(w, eps)[0]
    vn = unit(table.tail_relations[:, relations], eps)[0]
    if direction == "tail":
        return multiply(multiply(e, wn), conj(vn))
    return multiply(multiply(e, vn), conj(wn))


def score_candidates(
    table: EmbeddingTable, fixed: int, r: int, direction: str, candidates=None, eps: float = DEFAULT_EPS
) -> np.ndarray:
    """Scores of ``(fixed, r, c)`` (tail) or ``(c, r, fixed)`` (head) for each candidate."""
    q = query_vectors(table, [fixed], [r], direction, eps)[:, 0]
    if candidates is None:
        cand = table.entities
    else:
        candidates = np.asarray(candidates, dtype=np.int64)
        if len(candidates) and (candidates.min() < 0 or candidates.max() >= table.n_entities):
            raise IndexError("candidate id out of range")
        cand = table.entities[:, candidates]
    return np.einsum("ck,cnk->n", q, cand)
