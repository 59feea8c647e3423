"""Training: initialization, negative sampling, regularized logistic loss, Adagrad."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import kernels
from .errors import NonFiniteScoreError
from .graph import TripleStore, add_reciprocals
from .hypercomplex import DEFAULT_EPS
from .model import EmbeddingTable, ModelVariant, score_batch, score_grad_batch

logger = logging.getLogger(__name__)

SAMPLERS = ("uniform", "bernoulli")
INITIALIZERS = ("auto", "quaternion", "uniform")


@dataclass
class TrainConfig:
    k: int = 100
    lambda1: float = 0.0
    lambda2: float = 0.0
    n3_weight: float = 0.0
    neg_per_pos: int = 10
    lr: float = 0.1
    epochs: int = 100
    batch_count: int = 10
    sampler: str = "uniform"
    variant: ModelVariant = ModelVariant.QUATE
    reciprocal: bool = False
    type_constrained_sampling: bool = False
    type_constraints: bool = False  # evaluation candidates
    strict_negatives: bool = False
    init: str = "auto"
    seed: int = 0
    eval_every: int = 0
    patience: int = 0
    ties: str = "average"
    workers: int = 1
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        self.variant = ModelVariant(self.variant)
        self.validate()

    def validate(self):
        problems = []
        if self.k < 1:
            problems.append("k must be >= 1")
        if self.neg_per_pos < 1:
            problems.append("neg_per_pos must be >= 1")
        if not self.lr > 0:
            problems.append("lr must be > 0")
        if self.batch_count < 1:
            problems.append("batch_count must be >= 1")
        if self.epochs < 0:
            problems.append("epochs must be >= 0")
        for name in ("lambda1", "lambda2", "n3_weight"):
            if getattr(self, name) < 0:
                problems.append(f"{name} must be >= 0")
        if self.sampler not in SAMPLERS:
            problems.append(f"sampler must be one of {SAMPLERS}")
        if self.init not in INITIALIZERS:
            problems.append(f"init must be one of {INITIALIZERS}")
        if self.workers < 1:
            problems.append("workers must be >= 1")
        if problems:
            raise ValueError("; ".join(problems))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variant"] = self.variant.value
        return d

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


# ---------------------------------------------------------------------------
# initialization


def _quaternion_init(rng, shape, k):
    """Polar-form draw: modulus ~ U[-s, s], phase ~ U[-pi, pi], random pure-imaginary axis."""
    s = 1.0 / math.sqrt(2.0 * k)
    modulus = rng.uniform(-s, s, size=shape)
    theta = rng.uniform(-math.pi, math.pi, size=shape)
    axis = rng.uniform(-1.0, 1.0, size=(3,) + shape)
    n = np.sqrt(np.sum(axis * axis, axis=0))
    axis = np.where(n > 0, axis / np.where(n > 0, n, 1.0), np.array([1.0, 0.0, 0.0])[:, None, None])
    out = np.empty((4,) + shape)
    out[0] = modulus * np.cos(theta)
    out[1:] = modulus * np.sin(theta) * axis
    return out


def _uniform_init(rng, ncomp, shape, k):
    s = 1.0 / math.sqrt(2.0 * k)
    return rng.uniform(-s, s, size=(ncomp,) + shape)


def init_embeddings(config: TrainConfig, sizes, rng: np.random.Generator) -> EmbeddingTable:
    """Random table for ``sizes`` (anything with ``n_entities``/``n_relations``).

    Quaternion variants default to the polar initializer; OctonionE defaults
    to the uniform one.
    """
    variant = config.variant
    method = config.init
    if method == "auto":
        method = "uniform" if variant.ncomp == 8 else "quaternion"
    if method == "quaternion" and variant.ncomp != 4:
        raise ValueError("quaternion initializer needs a quaternion variant")
    k = config.k
    shapes = [(sizes.n_entities, k), (sizes.n_relations, k)]
    if variant.has_tail_relation:
        shapes.append((sizes.n_relations, k))
    if method == "quaternion":
        arrays = [_quaternion_init(rng, s, k) for s in shapes]
    else:
        arrays = [_uniform_init(rng, variant.ncomp, s, k) for s in shapes]
    tail = arrays[2] if variant.has_tail_relation else None
    return EmbeddingTable(arrays[0], arrays[1], variant, tail)


# ---------------------------------------------------------------------------
# negative sampling


@dataclass
class NegativeBatch:
    """Positives (label +1) followed by their corruptions (label -1).

    ``corrupted`` is 0 for head and 2 for tail corruption, -1 for positives.
    """

    triples: np.ndarray
    labels: np.ndarray
    corrupted: np.ndarray

    def __len__(self):
        return len(self.triples)

    @property
    def n_positive(self) -> int:
        return int(np.sum(self.labels > 0))


def _head_probability(store, relations, sampler):
    if sampler == "uniform":
        return np.full(len(relations), 0.5)
    stats = store.bernoulli[relations]
    total = stats.sum(axis=1)
    return np.where(total > 0, stats[:, 0] / np.where(total > 0, total, 1.0), 0.5)


def _draw_entities(store, rng, relations, slots, type_constrained):
    if not type_constrained:
        return rng.integers(0, store.n_entities, size=len(relations))
    u = rng.random(len(relations))
    out = np.floor(u * store.n_entities).astype(np.int64)
    tc = store.constraints
    for i, (r, slot) in enumerate(zip(relations.tolist(), slots.tolist())):
        pool = tc.heads[r] if slot == 0 else tc.tails[r]
        if len(pool):
            out[i] = pool[int(u[i] * len(pool))]
    return out


def sample_negatives(store: TripleStore, batch, config: TrainConfig, rng: np.random.Generator) -> NegativeBatch:
    """Corrupt head or tail of each positive ``neg_per_pos`` times.

    The replacement entity is uniform over all entities (or the relation's
    observed head/tail set with ``type_constrained_sampling``). Corruptions
    that happen to be observed triples are kept unless ``strict_negatives``.
    """
    batch = np.asarray(batch, dtype=np.int64).reshape(-1, 3)
    if len(batch) == 0:
        raise ValueError("empty batch")
    neg = np.repeat(batch, config.neg_per_pos, axis=0)
    p_head = _head_probability(store, neg[:, 1], config.sampler)
    slots = np.where(rng.random(len(neg)) < p_head, 0, 2)
    rows = np.arange(len(neg))
    neg[rows, slots] = _draw_entities(store, rng, neg[:, 1], slots, config.type_constrained_sampling)
    if config.strict_negatives:
        known = store.filter_index
        for _ in range(100):
            bad = np.fromiter((tuple(x) in known for x in neg.tolist()), dtype=bool, count=len(neg))
            if not bad.any():
                break
            idx = np.flatnonzero(bad)
            neg[idx, slots[idx]] = _draw_entities(
                store, rng, neg[idx, 1], slots[idx], config.type_constrained_sampling
            )
    triples = np.concatenate([batch, neg])
    labels = np.concatenate([np.ones(len(batch)), -np.ones(len(neg))])
    corrupted = np.concatenate([np.full(len(batch), -1), slots])
    return NegativeBatch(triples, labels, corrupted)


# ---------------------------------------------------------------------------
# loss


def softplus(x):
    return np.logaddexp(0.0, x)


def sigmoid(x):
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


@dataclass
class SparseGrad:
    ids: np.ndarray
    values: np.ndarray  # (ncomp, len(ids), k)


Gradients = dict  # field name -> SparseGrad


def _touched(table, triples):
    touched = {
        "entities": np.unique(np.concatenate([triples[:, 0], triples[:, 2]])),
        "relations": np.unique(triples[:, 1]),
    }
    if table.tail_relations is not None:
        touched["tail_relations"] = touched["relations"]
    return touched


def n3_term(table: EmbeddingTable, touched: dict, weight: float):
    """``weight * sum |q|^3`` over touched rows, ``|q|`` the per-dimension modulus.

    Returns ``(value, {field: gradient rows})``; a zero weight contributes
    nothing at all.
    """
    if weight == 0:
        return 0.0, {}
    value = 0.0
    grads = {}
    arrays = table.arrays()
    for name, ids in touched.items():
        x = arrays[name][:, ids]
        mod = np.sqrt(np.sum(x * x, axis=0))
        value += weight * float(np.sum(mod**3))
        grads[name] = 3.0 * weight * mod * x
    return value, grads


def _role_grads(table, triples, labels, eps):
    scores = score_batch(table, triples, eps)
    finite = np.isfinite(scores)
    if not finite.all():
        i = int(np.flatnonzero(~finite)[0])
        raise NonFiniteScoreError(triples[i], float(scores[i]))
    margin = -labels * scores
    loss = float(np.sum(softplus(margin)))
    coef = -labels * sigmoid(margin)
    return loss, score_grad_batch(table, triples, coef, eps)


_ROLE_FIELD = {"head": "entities", "tail": "entities", "relation": "relations", "tail_relation": "tail_relations"}
_ROLE_COLUMN = {"head": 0, "tail": 2, "relation": 1, "tail_relation": 1}


def _accumulate(table, triples, labels, touched, eps):
    loss, roles = _role_grads(table, triples, labels, eps)
    buffers = {name: np.zeros((table.ncomp, len(ids), table.k)) for name, ids in touched.items()}
    for role, g in roles.items():
        name = _ROLE_FIELD[role]
        rows = np.searchsorted(touched[name], triples[:, _ROLE_COLUMN[role]])
        kernels.scatter_add(buffers[name], rows, np.ascontiguousarray(g))
    return loss, buffers


def loss_and_grad(table: EmbeddingTable, batch: NegativeBatch, config: TrainConfig):
    """Regularized logistic loss over a labelled batch and its sparse gradient.

    Regularizers apply once to each distinct embedding the batch touches.
    The relation L2 term acts on the raw (unnormalized) relation rows.
    """
    triples = np.asarray(batch.triples, dtype=np.int64)
    labels = np.asarray(batch.labels, dtype=np.float64)
    touched = _touched(table, triples)
    workers = min(config.workers, len(triples))
    if workers <= 1:
        loss, buffers = _accumulate(table, triples, labels, touched, config.eps)
    else:
        chunks = np.array_split(np.arange(len(triples)), workers)
        with ThreadPoolExecutor(workers) as pool:
            parts = list(
                pool.map(lambda idx: _accumulate(table, triples[idx], labels[idx], touched, config.eps), chunks)
            )
        loss = 0.0
        buffers = {name: np.zeros((table.ncomp, len(ids), table.k)) for name, ids in touched.items()}
        for part_loss, part in parts:
            loss += part_loss
            for name in buffers:
                buffers[name] += part[name]
    arrays = table.arrays()
    rates = {"entities": config.lambda1, "relations": config.lambda2, "tail_relations": config.lambda2}
    for name, ids in touched.items():
        lam = rates[name]
        if lam:
            x = arrays[name][:, ids]
            loss += lam * float(np.sum(x * x))
            buffers[name] += 2.0 * lam * x
    value, n3 = n3_term(table, touched, config.n3_weight)
    loss += value
    for name, g in n3.items():
        buffers[name] += g
    return loss, {name: SparseGrad(touched[name], buffers[name]) for name in touched}


# ---------------------------------------------------------------------------
# optimizer


@dataclass
class AdagradState:
    accumulators: dict
    eps: float = 1e-8

    @classmethod
    def zeros(cls, table: EmbeddingTable, eps: float = 1e-8) -> AdagradState:
        return cls({name: np.zeros_like(arr) for name, arr in table.arrays().items()}, eps)


def adagrad_step(table: EmbeddingTable, state: AdagradState, grads: Gradients, lr: float):
    """Sparse Adagrad update, in place on ``table`` and ``state``.

    For each touched coordinate: ``acc += g**2; x -= lr * g / (sqrt(acc) + eps)``.
    """
    arrays = table.arrays()
    for name, sg in grads.items():
        acc = state.accumulators[name]
        param = arrays[name]
        g = sg.values
        a = acc[:, sg.ids] + g * g
        acc[:, sg.ids] = a
        param[:, sg.ids] -= lr * g / (np.sqrt(a) + state.eps)
    return table, state


# ---------------------------------------------------------------------------
# epoch loop


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    valid_mrr: float | None = None

    def line(self) -> str:
        mrr = "" if self.valid_mrr is None else repr(self.valid_mrr)
        return f"{self.epoch}\t{self.loss!r}\t{mrr}"


@dataclass
class TrainingLog:
    records: list = field(default_factory=list)
    best_epoch: int | None = None
    best_mrr: float | None = None
    stopped_early: bool = False

    def lines(self):
        return [r.line() for r in self.records]

    def write(self, path):
        with open(path, "w", encoding="utf-8") as f:
            for line in self.lines():
                f.write(line + "\n")

    @property
    def losses(self):
        return [r.loss for r in self.records]


def iterate_batches(n: int, batch_count: int, rng: np.random.Generator):
    """Shuffled index chunks; ``batch_count`` chunks of ``ceil(n / batch_count)``, last one short."""
    perm = rng.permutation(n)
    size = max(1, math.ceil(n / batch_count))
    for start in range(0, n, size):
        yield perm[start : start + size]


def train(store: TripleStore, config: TrainConfig, callback=None):
    """Train a table on ``store.train``; returns ``(table, TrainingLog)``.

    When ``config.eval_every`` is set, filtered validation MRR is computed
    at that cadence and the best-scoring table is returned. ``patience``
    stops after that many evaluations without improvement (0 disables).
    """
    from .evaluation import evaluate

    if config.reciprocal and not store.reciprocal:
        store = add_reciprocals(store)[1]
    if config.eval_every and len(store.valid) == 0:
        raise ValueError("validation split is empty but eval_every is set")
    rng = np.random.default_rng(config.seed)
    table = init_embeddings(config, store, rng)
    state = AdagradState.zeros(table)
    log = TrainingLog()
    best = None
    stagnant = 0
    for epoch in range(1, config.epochs + 1):
        total = 0.0
        for idx in iterate_batches(len(store.train), config.batch_count, rng):
            batch = sample_negatives(store, store.train[idx], config, rng)
            loss, grads = loss_and_grad(table, batch, config)
            adagrad_step(table, state, grads, config.lr)
            total += loss
        record = EpochRecord(epoch, total)
        if config.eval_every and epoch % config.eval_every == 0:
            report = evaluate(
                table, store, "valid", type_constraints=config.type_constraints,
                ties=config.ties, workers=config.workers,
            )
            record.valid_mrr = report.mrr
            if log.best_mrr is None or report.mrr > log.best_mrr:
                log.best_mrr, log.best_epoch = report.mrr, epoch
                best = table.copy()
                stagnant = 0
            else:
                stagnant += 1
        log.records.append(record)
        logger.debug(record.line())
        if callback is not None:
            callback(record, table)
        if config.patience and stagnant >= config.patience:
            log.stopped_early = True
            break
    return (best if best is not None else table), log
