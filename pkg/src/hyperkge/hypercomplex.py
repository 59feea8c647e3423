"""Quaternion and octonion algebra on parallel coordinate arrays.

Every array-level function takes arrays whose *first* axis holds the
hypercomplex components (4 for quaternions, 8 for octonions); any trailing
axes are element-wise. ``x[0]`` is the real part, ``x[1:]`` the imaginary
coefficients. So a batch of ``B`` quaternion embeddings of dimension ``k``
is a ``(4, B, k)`` array, and ``hamilton(x, y)`` multiplies dimension-wise.

The octonion product is driven by an explicit basis multiplication table
built from the seven oriented lines of the Fano plane:

    (1, 2, 3), (1, 4, 5), (1, 7, 6), (2, 4, 6), (2, 5, 7), (3, 4, 7), (3, 6, 5)

For a line ``(a, b, c)``: ``e_a e_b = e_c``, ``e_b e_c = e_a``,
``e_c e_a = e_b`` and reversing either product flips the sign. The table
is checked against norm multiplicativity and alternativity in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateQuaternionError, DimensionMismatchError

DEFAULT_EPS = 1e-12

FANO_LINES = ((1, 2, 3), (1, 4, 5), (1, 7, 6), (2, 4, 6), (2, 5, 7), (3, 4, 7), (3, 6, 5))


def _build_octonion_table():
    index = np.zeros((8, 8), dtype=np.intp)
    sign = np.zeros((8, 8), dtype=np.int8)
    for i in range(8):
        index[0, i] = index[i, 0] = i
        sign[0, i] = sign[i, 0] = 1
    for i in range(1, 8):
        index[i, i] = 0
        sign[i, i] = -1
    for a, b, c in FANO_LINES:
        for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
            index[x, y], sign[x, y] = z, 1
            index[y, x], sign[y, x] = z, -1
    index.setflags(write=False)
    sign.setflags(write=False)
    return index, sign


#: ``e_i * e_j == OCTONION_SIGN[i, j] * e_{OCTONION_INDEX[i, j]}``
OCTONION_INDEX, OCTONION_SIGN = _build_octonion_table()


# ---------------------------------------------------------------------------
# array-level kernels


def hamilton(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Dimension-wise Hamilton product of two ``(4, ...)`` arrays."""
    a1, b1, c1, d1 = x
    a2, b2, c2, d2 = y
    return np.stack(
        (
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    )


def octonion_mul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Dimension-wise Cayley product of two ``(8, ...)`` arrays."""
    shape = np.broadcast_shapes(x.shape[1:], y.shape[1:])
    out = np.zeros((8,) + shape, dtype=np.result_type(x, y, np.float64))
    for i in range(8):
        xi = x[i]
        for j in range(8):
            m = OCTONION_INDEX[i, j]
            if OCTONION_SIGN[i, j] > 0:
                out[m] += xi * y[j]
            else:
                out[m] -= xi * y[j]
    return out


def multiply(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Hamilton or Cayley product, chosen by the component count."""
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatchError(x.shape[0], y.shape[0])
    if x.shape[0] == 4:
        return hamilton(x, y)
    if x.shape[0] == 8:
        return octonion_mul(x, y)
    raise ValueError(f"unsupported component count {x.shape[0]}")


def conj(x: np.ndarray) -> np.ndarray:
    out = -x
    out[0] = x[0]
    return out


def norm(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(x * x, axis=0))


def unit(x: np.ndarray, eps: float = DEFAULT_EPS) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(x / |x|, |x|)``; raises if any modulus is ``<= eps``."""
    n = norm(x)
    bad = n <= eps
    if np.any(bad):
        if n.ndim == 1:
            dims = np.flatnonzero(bad).tolist()
        else:
            dims = [tuple(int(i) for i in ix) for ix in np.argwhere(bad)]
        raise DegenerateQuaternionError(dims, eps)
    return x / n, n


def inner(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.sum(x * y))


# ---------------------------------------------------------------------------
# value types


class _Hypercomplex:
    ncomp: int
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=np.float64)
        if coords.ndim == 1 and coords.shape[0] == self.ncomp:
            coords = coords[:, None]
        if coords.ndim != 2 or coords.shape[0] != self.ncomp or coords.shape[1] < 1:
            raise ValueError(
                f"{type(self).__name__} needs shape ({self.ncomp}, k>=1), got {coords.shape}"
            )
        if not np.all(np.isfinite(coords)):
            raise ValueError(f"{type(self).__name__} has non-finite coordinates")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def k(self) -> int:
        return self.coords.shape[1]

    def __len__(self):
        return self.k

    def __eq__(self, other):
        return type(self) is type(other) and np.array_equal(self.coords, other.coords)

    def allclose(self, other, atol=1e-12):
        return self.coords.shape == other.coords.shape and np.allclose(
            self.coords, other.coords, rtol=0, atol=atol
        )


@dataclass(frozen=True, eq=False)
class QuaternionVector(_Hypercomplex):
    """``k`` quaternions stored as four parallel coordinate vectors."""

    coords: np.ndarray
    ncomp = 4

    @classmethod
    def from_parts(cls, a, b, c, d) -> QuaternionVector:
        return cls(np.stack([np.atleast_1d(np.asarray(v, dtype=float)) for v in (a, b, c, d)]))

    a = property(lambda self: self.coords[0])
    b = property(lambda self: self.coords[1])
    c = property(lambda self: self.coords[2])
    d = property(lambda self: self.coords[3])


@dataclass(frozen=True, eq=False)
class OctonionVector(_Hypercomplex):
    """``k`` octonions stored as eight parallel coordinate vectors."""

    coords: np.ndarray
    ncomp = 8

    @classmethod
    def basis(cls, i: int, k: int = 1) -> OctonionVector:
        coords = np.zeros((8, k))
        coords[i] = 1.0
        return cls(coords)


def _check_same(x: _Hypercomplex, y: _Hypercomplex):
    if x.k != y.k:
        raise DimensionMismatchError(x.k, y.k)


def hamilton_product(q1: QuaternionVector, q2: QuaternionVector) -> QuaternionVector:
    _check_same(q1, q2)
    return QuaternionVector(hamilton(q1.coords, q2.coords))


def conjugate(q: QuaternionVector) -> QuaternionVector:
    return QuaternionVector(conj(q.coords))


def qnorm(q: QuaternionVector) -> np.ndarray:
    return norm(q.coords)


def normalize(q: QuaternionVector, eps: float = DEFAULT_EPS) -> QuaternionVector:
    return QuaternionVector(unit(q.coords, eps)[0])


def quat_inner(q1: QuaternionVector, q2: QuaternionVector) -> float:
    _check_same(q1, q2)
    return inner(q1.coords, q2.coords)


def octonion_product(o1: OctonionVector, o2: OctonionVector) -> OctonionVector:
    _check_same(o1, o2)
    return OctonionVector(octonion_mul(o1.coords, o2.coords))


def octonion_conjugate(o: OctonionVector) -> OctonionVector:
    return OctonionVector(conj(o.coords))


def octonion_norm(o: OctonionVector) -> np.ndarray:
    return norm(o.coords)


def octonion_normalize(o: OctonionVector, eps: float = DEFAULT_EPS) -> OctonionVector:
    return OctonionVector(unit(o.coords, eps)[0])


def octonion_inner(o1: OctonionVector, o2: OctonionVector) -> float:
    _check_same(o1, o2)
    return inner(o1.coords, o2.coords)
