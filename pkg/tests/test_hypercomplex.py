import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hyperkge import hypercomplex as hc
from hyperkge.errors import DegenerateQuaternionError, DimensionMismatchError
from hyperkge.hypercomplex import OctonionVector, QuaternionVector

from oracles import flat_sumsq, octonion_mul_rows, quat_mul_matrix

Q = QuaternionVector


def q(*coords):
    return Q(np.array(coords, dtype=float))


# Magnitudes below 1e-50 are left out: squaring a product of two such values
# underflows, so norm identities cannot hold in float64 there.
finite = st.one_of(st.just(0.0), st.floats(1e-50, 10), st.floats(-10, -1e-50))


def quats(k=3):
    return arrays(np.float64, (4, k), elements=finite).map(Q)


def octs(k=2):
    return arrays(np.float64, (8, k), elements=finite).map(OctonionVector)


class TestQuaternionExamples:
    def test_ij_is_k(self):
        assert hc.hamilton_product(q(0, 1, 0, 0), q(0, 0, 1, 0)) == q(0, 0, 0, 1)

    def test_unit_rules(self):
        i, j, k = q(0, 1, 0, 0), q(0, 0, 1, 0), q(0, 0, 0, 1)
        minus_one = q(-1, 0, 0, 0)
        for u in (i, j, k):
            assert hc.hamilton_product(u, u) == minus_one
        assert hc.hamilton_product(j, i) == q(0, 0, 0, -1)
        assert hc.hamilton_product(j, k) == i
        assert hc.hamilton_product(k, i) == j
        assert hc.hamilton_product(hc.hamilton_product(i, j), k) == minus_one

    def test_identity(self, rng):
        x = Q(rng.normal(size=(4, 6)))
        one = Q(np.vstack([np.ones(6), np.zeros((3, 6))]))
        assert hc.hamilton_product(x, one) == x

    def test_known_product(self):
        # from the left-multiplication matrix oracle
        assert hc.hamilton_product(q(1, 2, 3, 4), q(5, 6, 7, 8)) == q(-60, 12, 30, 24)

    def test_conjugate(self):
        assert hc.conjugate(q(1, 2, 3, 4)) == q(1, -2, -3, -4)
        x = q(0.5, -1, 2, 3)
        assert hc.conjugate(hc.conjugate(x)) == x
        assert hc.hamilton_product(q(1, 2, 3, 4), hc.conjugate(q(1, 2, 3, 4))) == q(30, 0, 0, 0)

    def test_qnorm(self):
        assert hc.qnorm(q(1, 0, 0, 0))[0] == 1.0
        assert hc.qnorm(q(0, 0, 0, 0))[0] == 0.0
        assert hc.qnorm(q(1, 2, 3, 4))[0] == pytest.approx(5.477225575051661, abs=1e-12)

    def test_normalize(self):
        assert hc.normalize(q(0, 0, 3, 4)).allclose(q(0, 0, 0.6, 0.8))
        assert hc.normalize(q(2, 0, 0, 0)) == q(1, 0, 0, 0)

    def test_normalize_degenerate_names_dimension(self):
        x = Q(np.array([[1.0, 0.0, 2.0], [0, 0, 0], [0, 0, 0], [0, 0, 0]]))
        with pytest.raises(DegenerateQuaternionError) as info:
            hc.normalize(x)
        assert info.value.dims == [1]
        with pytest.raises(DegenerateQuaternionError):
            hc.normalize(q(0, 0, 0, 0))

    def test_inner(self):
        assert hc.quat_inner(q(1, 2, 3, 4), q(5, 6, 7, 8)) == 70.0
        assert hc.quat_inner(q(1, 0, 0, 0), q(0, 1, 0, 0)) == 0.0

    def test_dimension_mismatch(self, rng):
        a, b = Q(rng.normal(size=(4, 3))), Q(rng.normal(size=(4, 2)))
        with pytest.raises(DimensionMismatchError) as info:
            hc.hamilton_product(a, b)
        assert (info.value.left, info.value.right) == (3, 2)
        assert "3" in str(info.value) and "2" in str(info.value)
        with pytest.raises(DimensionMismatchError):
            hc.quat_inner(a, b)

    def test_invalid_construction(self):
        with pytest.raises(ValueError):
            Q(np.zeros((4, 0)))
        with pytest.raises(ValueError):
            Q(np.zeros((3, 2)))
        with pytest.raises(ValueError):
            Q(np.array([[np.nan], [0], [0], [0]]))

    def test_from_parts(self):
        x = Q.from_parts([1, 2], [3, 4], [5, 6], [7, 8])
        assert x.k == 2
        np.testing.assert_array_equal(x.c, [5, 6])


class TestQuaternionProperties:
    def test_matrix_oracle_1000_pairs(self, rng):
        x = rng.normal(size=(4, 1000))
        y = rng.normal(size=(4, 1000))
        got = hc.hamilton(x, y)
        assert np.max(np.abs(got - quat_mul_matrix(x, y))) < 1e-12

    @given(quats(), quats())
    def test_norm_multiplicative(self, x, y):
        lhs = hc.qnorm(hc.hamilton_product(x, y))
        rhs = hc.qnorm(x) * hc.qnorm(y)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-300)

    @given(quats(), quats(), quats())
    def test_associative(self, x, y, z):
        lhs = hc.hamilton_product(hc.hamilton_product(x, y), z).coords
        rhs = hc.hamilton_product(x, hc.hamilton_product(y, z)).coords
        scale = max(1.0, np.max(np.abs(lhs)))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale

    def test_not_commutative(self, rng):
        x, y = Q(rng.normal(size=(4, 50))), Q(rng.normal(size=(4, 50)))
        assert not hc.hamilton_product(x, y).allclose(hc.hamilton_product(y, x), atol=1e-6)

    @given(quats())
    def test_times_conjugate_is_real(self, x):
        p = hc.hamilton_product(x, hc.conjugate(x)).coords
        n2 = hc.qnorm(x) ** 2
        scale = max(1.0, n2.max())
        assert np.max(np.abs(p[1:])) <= 1e-12 * scale
        assert np.max(np.abs(p[0] - n2)) <= 1e-12 * scale

    @given(quats())
    @settings(max_examples=200)
    def test_normalize_gives_unit(self, x):
        if np.any(hc.qnorm(x) <= 1e-6):
            return
        np.testing.assert_allclose(hc.qnorm(hc.normalize(x)), 1.0, atol=1e-12)

    @given(quats())
    def test_self_inner_is_sum_of_squared_norms(self, x):
        assert hc.quat_inner(x, x) == pytest.approx(float(np.sum(hc.qnorm(x) ** 2)), rel=1e-12, abs=1e-300)


class TestOctonion:
    e = [OctonionVector.basis(i) for i in range(8)]

    def test_e1e2_is_e3(self):
        assert hc.octonion_product(self.e[1], self.e[2]) == self.e[3]

    def test_identity(self, rng):
        o = OctonionVector(rng.normal(size=(8, 4)))
        one = OctonionVector.basis(0, 4)
        assert hc.octonion_product(o, one) == o
        assert hc.octonion_product(one, o) == o

    def test_non_associativity_witness(self):
        e = self.e
        left = hc.octonion_product(hc.octonion_product(e[1], e[2]), e[4])
        right = hc.octonion_product(e[1], hc.octonion_product(e[2], e[4]))
        assert left == e[7]
        assert right == OctonionVector(-e[7].coords)

    def test_matches_reference_rows(self, rng):
        x = rng.normal(size=(8, 300))
        y = rng.normal(size=(8, 300))
        np.testing.assert_allclose(hc.octonion_mul(x, y), octonion_mul_rows(x, y), atol=1e-12)

    def test_basis_table_against_reference_rows(self):
        eye = np.eye(8)
        for i in range(8):
            for j in range(8):
                want = octonion_mul_rows(eye[i], eye[j])
                got = np.zeros(8)
                got[hc.OCTONION_INDEX[i, j]] = hc.OCTONION_SIGN[i, j]
                np.testing.assert_array_equal(got, want)

    def test_conjugate_and_norm(self):
        ones = OctonionVector(np.ones(8))
        assert hc.octonion_conjugate(ones) == OctonionVector(np.array([1.0] + [-1.0] * 7))
        assert hc.octonion_norm(self.e[5])[0] == 1.0
        assert hc.octonion_norm(ones)[0] == pytest.approx(math.sqrt(flat_sumsq(np.ones(8))), abs=1e-15)

    def test_normalize(self, rng):
        o = OctonionVector(rng.normal(size=(8, 5)))
        np.testing.assert_allclose(hc.octonion_norm(hc.octonion_normalize(o)), 1.0, atol=1e-12)
        with pytest.raises(DegenerateQuaternionError):
            hc.octonion_normalize(OctonionVector(np.zeros((8, 2))))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            hc.octonion_product(OctonionVector.basis(1, 2), OctonionVector.basis(1, 3))

    @given(octs(), octs())
    def test_norm_multiplicative(self, x, y):
        lhs = hc.octonion_norm(hc.octonion_product(x, y))
        rhs = hc.octonion_norm(x) * hc.octonion_norm(y)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-300)

    @given(octs(), octs())
    def test_alternative(self, x, y):
        # (xx)y == x(xy) and (yx)x == y(xx)
        xx = hc.octonion_product(x, x)
        lhs = hc.octonion_product(xx, y).coords
        rhs = hc.octonion_product(x, hc.octonion_product(x, y)).coords
        scale = max(1.0, np.max(np.abs(lhs)))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale

    def test_not_commutative(self):
        assert hc.octonion_product(self.e[1], self.e[2]) != hc.octonion_product(self.e[2], self.e[1])

    def test_adjoint_identity(self, rng):
        # <xy, z> = <x, z conj(y)> = <y, conj(x) z>; the gradients rely on this
        x, y, z = (rng.normal(size=(8, 7)) for _ in range(3))
        lhs = hc.inner(hc.octonion_mul(x, y), z)
        assert lhs == pytest.approx(hc.inner(x, hc.octonion_mul(z, hc.conj(y))), rel=1e-12)
        assert lhs == pytest.approx(hc.inner(y, hc.octonion_mul(hc.conj(x), z)), rel=1e-12)

    def test_multiply_rejects_mixed_kinds(self):
        with pytest.raises(DimensionMismatchError):
            hc.multiply(np.zeros((4, 2)), np.zeros((8, 2)))
