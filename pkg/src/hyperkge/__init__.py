"""Quaternion and octonion knowledge graph embeddings."""

from .errors import (
    DataError,
    DegenerateQuaternionError,
    DimensionMismatchError,
    HyperKGEError,
    NonFiniteScoreError,
    NumericError,
)
from .evaluation import RankReport, evaluate, filtered_rank, parameter_count
from .graph import TripleStore, Vocabulary, add_reciprocals, bernoulli_stats, load_tsv, type_constraints
from .hypercomplex import OctonionVector, QuaternionVector
from .kernels import BACKEND
from .model import EmbeddingTable, ModelVariant, score_candidates, score_gradients, score_triple
from .train import TrainConfig, init_embeddings, train

__version__ = "0.1.0"
