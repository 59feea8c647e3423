import numpy as np
import pytest

from hyperkge import kernels
from hyperkge.graph import TripleStore
from hyperkge.model import EmbeddingTable, ModelVariant

BACKENDS = ["python"] + (["compiled"] if kernels.compiled_backend is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    mod = kernels.python_backend if request.param == "python" else kernels.compiled_backend
    for name in ("rotate_score", "rotate_grad", "scatter_add"):
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_table(rng, variant, n_entities=5, n_relations=2, k=3, scale=1.0):
    variant = ModelVariant(variant)
    D = variant.ncomp
    tail = rng.normal(size=(D, n_relations, k)) * scale if variant.has_tail_relation else None
    return EmbeddingTable(
        rng.normal(size=(D, n_entities, k)) * scale,
        rng.normal(size=(D, n_relations, k)) * scale,
        variant,
        tail,
    )


@pytest.fixture
def toy_store():
    train = [(0, 0, 1), (1, 0, 2), (2, 1, 3), (3, 1, 0), (0, 1, 4), (4, 0, 1), (1, 1, 3)]
    valid = [(2, 0, 4)]
    test = [(0, 0, 2), (3, 1, 4)]
    return TripleStore(train, valid, test, n_entities=5, n_relations=2)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
