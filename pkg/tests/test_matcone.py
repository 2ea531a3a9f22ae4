import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from matgibbs import matcone
from matgibbs.matcone import ConeError, cone_alpha, cone_theta, hs_inner, is_psd, norms


def _bisect_alpha(a, b):
    lo, hi = 0.0, 1.0
    while np.linalg.eigvalsh(b - hi * a)[0] >= 0:
        hi *= 2
    for _ in range(200):
        mid = (lo + hi) / 2
        if np.linalg.eigvalsh(b - mid * a)[0] >= 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def _pd(rng, d, jitter=0.1):
    g = rng.standard_normal((d, d))
    return g @ g.T + jitter * np.eye(d)


entries = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def sym_matrices(draw, max_dim=5):
    d = draw(st.integers(1, max_dim))
    a = draw(arrays(np.float64, (d, d), elements=entries))
    return a + a.T


@st.composite
def gram_pairs(draw, max_dim=4):
    d = draw(st.integers(1, max_dim))
    g1 = draw(arrays(np.float64, (d, d), elements=entries))
    g2 = draw(arrays(np.float64, (d, d), elements=entries))
    return g1.T @ g1, g2.T @ g2


class TestInner:
    def test_identity(self):
        assert hs_inner(np.eye(2), np.eye(2)) == 2

    def test_diagonal(self):
        assert hs_inner(np.diag([2.0, 1.0]), np.diag([3.0, 4.0])) == 10

    def test_symmetric_against_double_loop(self, rng):
        for _ in range(100):
            d = int(rng.integers(1, 6))
            a, b = rng.standard_normal((2, d, d))
            a, b = a + a.T, b + b.T
            loop = sum(a[i, j] * b[i, j] for i in range(d) for j in range(d))
            assert hs_inner(a, b) == pytest.approx(loop, rel=1e-13, abs=1e-13)
            assert hs_inner(a, b) == pytest.approx(hs_inner(b, a), rel=1e-15, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            hs_inner(np.eye(2), np.eye(3))


class TestNorms:
    def test_identity(self):
        assert norms(np.eye(2)) == pytest.approx((1, np.sqrt(2), 1))

    def test_diagonal(self):
        assert norms(np.diag([3.0, -4.0])) == pytest.approx((4, 5, 4))

    @settings(max_examples=200, deadline=None)
    @given(sym_matrices())
    def test_equivalence(self, a):
        nm = norms(a)
        d = a.shape[0]
        slack = 1e-12 * max(1.0, nm.hs)
        assert nm.quad <= nm.hs + slack
        assert nm.hs <= np.sqrt(d) * nm.quad + slack
        assert nm.op == pytest.approx(nm.quad, rel=1e-12, abs=1e-12)

    def test_equivalence_1000_random(self, rng):
        for _ in range(1000):
            d = int(rng.integers(1, 8))
            a = rng.standard_normal((d, d))
            a = a + a.T
            ev = np.linalg.eigvalsh(a)
            quad = np.max(np.abs(ev))
            hs = np.sqrt(np.sum(ev**2))
            nm = norms(a)
            assert nm.quad == pytest.approx(quad, rel=1e-13)
            assert nm.hs == pytest.approx(hs, rel=1e-13)
            assert quad <= hs * (1 + 1e-14) <= np.sqrt(d) * quad * (1 + 1e-13)


class TestPsd:
    def test_identity(self):
        assert is_psd(np.eye(2), 0)

    def test_indefinite(self):
        assert not is_psd(np.diag([1.0, -1.0]), 1e-12)

    def test_gram(self, rng):
        for _ in range(100):
            g = rng.standard_normal((3, 3))
            assert is_psd(g.T @ g, 1e-10)

    def test_relative_tolerance(self):
        big = np.diag([1e6, -1e-8])
        assert is_psd(big, 1e-12)
        assert not is_psd(big, 0)

    def test_negative_tolerance_rejected(self):
        with pytest.raises(ValueError):
            is_psd(np.eye(2), -1)


class TestDuality:
    @settings(max_examples=200, deadline=None)
    @given(gram_pairs())
    def test_hs_positivity(self, pair):
        a, b = pair
        assert hs_inner(a, b) >= -1e-9 * max(1.0, np.linalg.norm(a) * np.linalg.norm(b))

    def test_hs_positivity_1000(self, rng):
        for _ in range(1000):
            d = int(rng.integers(1, 5))
            g1, g2 = rng.standard_normal((2, d, d))
            assert hs_inner(g1.T @ g1, g2.T @ g2) >= -1e-12

    def test_monotonicity(self, rng):
        for _ in range(500):
            d = int(rng.integers(1, 5))
            a = _pd(rng, d, 0)
            b = rng.standard_normal((d, d))
            b = b + b.T
            g = rng.standard_normal((d, d))
            c = b + g @ g.T
            assert hs_inner(a, b) <= hs_inner(a, c) + 1e-12

    def test_sandwich_converse(self, rng):
        for _ in range(200):
            d = int(rng.integers(1, 5))
            a, b = _pd(rng, d), _pd(rng, d)
            # eigenvalue oracle for the smallest D with e^-D B <= A <= e^D B
            w = np.linalg.eigvalsh(np.linalg.solve(np.linalg.cholesky(b), np.linalg.solve(np.linalg.cholesky(b), a).T))
            d4 = max(abs(np.log(w[0])), abs(np.log(w[-1])))
            assert matcone.sandwich_exponent(a, b) == pytest.approx(d4, rel=1e-9, abs=1e-12)
            assert is_psd(a - np.exp(-d4) * b, 1e-10) and is_psd(np.exp(d4) * b - a, 1e-10)
            assert np.linalg.norm(b - a) <= np.sqrt(d) * (np.exp(d4) - 1) * np.linalg.norm(a) * (1 + 1e-12)


class TestConeAlpha:
    def test_diagonal(self):
        assert cone_alpha(np.eye(2), np.diag([2.0, 1.0])) == pytest.approx(1.0, rel=1e-15)

    def test_self(self, rng):
        a = _pd(rng, 3)
        assert cone_alpha(a, a) == pytest.approx(1.0, rel=1e-12)

    def test_bisection_oracle(self, rng):
        for _ in range(200):
            d = int(rng.integers(1, 5))
            a, b = _pd(rng, d), _pd(rng, d)
            alpha = cone_alpha(a, b)
            assert alpha == pytest.approx(_bisect_alpha(a, b), rel=1e-10)

    def test_non_pd(self):
        with pytest.raises(ConeError):
            cone_alpha(np.diag([1.0, 0.0]), np.eye(2))
        with pytest.raises(ConeError):
            cone_alpha(np.eye(2), np.diag([1.0, -1.0]))


class TestConeTheta:
    def test_diagonal(self):
        assert cone_theta(np.eye(2), np.diag([2.0, 1.0])) == pytest.approx(np.log(2), rel=1e-14)

    def test_zero_cases(self, rng):
        a = _pd(rng, 3)
        assert cone_theta(a, a) == pytest.approx(0, abs=1e-12)
        assert cone_theta(a, 7 * a) == pytest.approx(0, abs=1e-12)

    def test_scale_invariance(self, rng):
        a, b = _pd(rng, 3), _pd(rng, 3)
        assert cone_theta(a, 0.01 * b) == pytest.approx(cone_theta(a, b), rel=1e-10)

    def test_metric_axioms(self, rng):
        for _ in range(500):
            d = int(rng.integers(2, 5))
            a, b, c = _pd(rng, d), _pd(rng, d), _pd(rng, d)
            ab = cone_theta(a, b)
            assert ab >= 0
            assert ab == pytest.approx(cone_theta(b, a), rel=1e-9, abs=1e-12)
            assert ab <= cone_theta(a, c) + cone_theta(c, b) + 1e-9
            assert ab > 1e-9  # random matrices are not proportional

    def test_non_pd(self):
        with pytest.raises(ConeError):
            cone_theta(np.eye(2), np.zeros((2, 2)))


def test_cone_params_validation():
    assert matcone.ConeParams(1.0, 0.5).validate().a == 1.0
    with pytest.raises(ValueError):
        matcone.ConeParams(0.0).validate()
    with pytest.raises(ValueError):
        matcone.ConeParams(1.0, 1.5).validate()


def test_sym_symmetrizes():
    a = matcone.sym([[1.0, 2.0], [0.0, 1.0]])
    assert a[0, 1] == a[1, 0] == 1.0
    with pytest.raises(ValueError):
        matcone.sym(np.ones((2, 3)))
