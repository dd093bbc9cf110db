import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rvlab import exponents as ex
from rvlab import integrands as it
from rvlab.exponents import ExponentVector, ExponentVectorK
from rvlab.integrands import FactorMultiset, ONE_MINUS_PREFIX, ONE_MINUS_VAR, VAR

X2 = np.array([0.3, 0.5])
HALF3 = np.full(3, 0.5)

interior = st.floats(1e-3, 1 - 1e-3)


def points(rng, m, n):
    return rng.uniform(1e-6, 1 - 1e-6, size=(m, n))


# D_k and delta_k ----------------------------------------------------------------

def test_D_examples():
    assert it.eval_D(X2, 0) == 1.0
    assert it.eval_D(X2, 1) == pytest.approx(0.5, abs=1e-15)
    assert it.eval_D(X2, 2) == pytest.approx(0.65, abs=1e-15)


def test_delta_examples():
    assert it.eval_delta(X2, 0) == 1.0
    assert it.eval_delta(X2, 2) == pytest.approx(0.65, abs=1e-15)
    assert it.eval_delta(HALF3, 3) == pytest.approx(0.625, abs=1e-15)


@pytest.mark.parametrize("n", range(1, 7))
def test_D_recurrence_matches_direct_sum(n):
    x = points(np.random.default_rng(n), 1000, n)
    for k in range(n + 1):
        np.testing.assert_allclose(it.eval_D(x, k), it.eval_D_direct(x, k), rtol=0, atol=1e-14)


def test_delta_equals_D_at_n2():
    x = points(np.random.default_rng(0), 1000, 2)
    assert np.array_equal(it.eval_delta(x, 2), it.eval_D(x, 2))


@pytest.mark.parametrize("n", range(1, 7))
def test_D_and_delta_in_unit_interval(n):
    x = points(np.random.default_rng(10 + n), 10_000, n)
    for k in range(n + 1):
        for v in (it.eval_D(x, k), it.eval_delta(x, k)):
            assert np.all(v > 0) and np.all(v <= 1)


def test_D_rejects_bad_k():
    with pytest.raises(ValueError):
        it.eval_D(X2, 3)


# Integrands ---------------------------------------------------------------------

def test_J_examples():
    zero3 = ExponentVector.from_flat(3, [0] * 8)
    assert it.integrand_J(zero3, HALF3) == pytest.approx(1.6, rel=1e-15)
    zero2 = ExponentVector.from_flat(2, [0] * 5)
    assert it.integrand_J(zero2, X2) == pytest.approx(1 / 0.65, rel=1e-15)


def test_J_parity_factors_n4():
    x = np.full(4, 0.5)
    zero4 = ExponentVector.from_flat(4, [0] * 11)
    D = [it.eval_D(x, k) for k in range(5)]
    assert it.integrand_J(zero4, x) == pytest.approx(D[2] / (D[3] * D[4]), rel=1e-15)


def test_K_examples():
    y = np.array([0.5, 0.5])
    assert it.integrand_K(ExponentVectorK.from_flat(2, [0] * 5), y) == pytest.approx(4 / 3)
    y3 = np.array([0.2, 0.7, 0.4])
    u2, u3 = 0.2 * 0.7, 0.2 * 0.7 * 0.4
    assert it.integrand_K(ex.sorokin(0), y3) == pytest.approx(1 / ((1 - u2) * (1 - u3)))


def test_K_polynomial_case():
    P = ExponentVectorK(2, (2, 1), (0, 3), (-1,))
    y = np.array([0.3, 0.8])
    assert it.integrand_K(P, y) == pytest.approx(0.3 ** 2 * 0.8 * 0.2 ** 3)


def test_L_examples():
    zero2 = ExponentVector.from_flat(2, [0] * 5)
    assert it.integrand_L(zero2, X2) == pytest.approx(1 / 0.65)
    assert it.integrand_L(ex.beukers(0), HALF3) == pytest.approx(1.6)


@settings(max_examples=100)
@given(st.lists(st.integers(-2, 3), min_size=5, max_size=5), interior, interior)
def test_L_equals_J_at_n2(vals, s, t):
    p = ExponentVector.from_flat(2, vals)
    x = np.array([s, t])
    assert it.integrand_L(p, x) == pytest.approx(it.integrand_J(p, x), rel=1e-13)


def test_negative_power_of_zero_is_flagged():
    p = ExponentVector(2, (-1, 0), (0, 0), (0,))
    with pytest.raises(it.NonFiniteSample):
        it.integrand_L(p, np.array([0.0, 0.5]))
    batch = it.integrand_L(p, np.array([[0.0, 0.5], [0.5, 0.5]]))
    assert np.isnan(batch[0]) and np.isfinite(batch[1])


# Changes of variables ----------------------------------------------------------------

def test_cov_theorem1_examples():
    u, v = 0.3, 0.6
    np.testing.assert_allclose(it.cov_theorem1(np.array([u, v])), [(1 - u) * v / (1 - u * v), u])
    np.testing.assert_allclose(it.cov_theorem1(HALF3), [0.5, 1 / 3, 0.5])


@pytest.mark.parametrize("n", range(2, 7))
def test_cov_theorem1_stays_interior(n):
    x = it.cov_theorem1(points(np.random.default_rng(n), 10_000, n))
    assert np.all(x > 0) and np.all(x < 1)


def test_cov_theorem1_jacobian_closed_form_n2():
    # x = ((1-u)v/(1-uv), u): |det| = (1-u)/(1-uv)^2
    y = np.array([0.5, 0.5])
    expected = 0.5 / 0.75 ** 2
    assert it.jacobian_theorem1(y) == pytest.approx(expected, rel=1e-15)
    assert it.jacobian_fd(it.cov_theorem1, y) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_pushforward_identity_theorem1(n):
    rng = np.random.default_rng(100 + n)
    for _ in range(100):
        p = ExponentVector.from_flat(n, rng.integers(0, 3, ex.dim(n)))
        y = rng.uniform(0.05, 0.95, n)
        lhs = it.integrand_J(p, it.cov_theorem1(y)) * it.jacobian_fd(it.cov_theorem1, y)
        rhs = it.integrand_K(ex.theorem1_map(p), y)
        assert lhs == pytest.approx(rhs, rel=1e-6)


@pytest.mark.parametrize("n", range(2, 6))
def test_jacobians_closed_form_vs_fd(n):
    rng = np.random.default_rng(n)
    for _ in range(20):
        y = rng.uniform(0.05, 0.95, n)
        assert it.jacobian_theorem1(y) == pytest.approx(it.jacobian_fd(it.cov_theorem1, y), rel=1e-7)
        assert it.jacobian_yprime(y) == pytest.approx(it.jacobian_fd(it.cov_yprime, y), rel=1e-7)


def test_cov_yprime_examples():
    u, v = 0.3, 0.6
    np.testing.assert_allclose(it.cov_yprime(np.array([u, v])), [1 - u * v, (1 - u) / (1 - u * v)])
    np.testing.assert_allclose(it.cov_yprime(HALF3), [0.875, 6 / 7, 2 / 3], rtol=1e-15)


@pytest.mark.parametrize("n", range(2, 6))
def test_yprime_prefix_identity(n):
    y = points(np.random.default_rng(n), 1000, n)
    yp = it.cov_yprime(y)
    lhs = np.cumprod(yp, axis=1)
    u = np.cumprod(y, axis=1)
    for k in range(1, n + 1):
        np.testing.assert_allclose(lhs[:, k - 1], 1 - u[:, n - k], rtol=0, atol=1e-12)


@pytest.mark.parametrize("n", range(2, 6))
def test_yprime_involution_high_precision(n):
    rng = np.random.default_rng(n)
    y = points(rng, 200, n)
    with mpmath.workdps(30):
        ym = np.array([[mpmath.mpf(float(v)) for v in row] for row in y], dtype=object)
        back = it.cov_yprime(it.cov_yprime(ym))
        err = max(abs(float(a - b)) for a, b in zip(back.ravel(), ym.ravel()))
    assert err < 1e-12


def test_yprime_involution_in_doubles_away_from_corner():
    y = np.random.default_rng(1).uniform(0.05, 0.9, size=(1000, 3))
    np.testing.assert_allclose(it.cov_yprime(it.cov_yprime(y)), y, rtol=0, atol=1e-12)


def test_jacobian_fd_identity_and_swap():
    y = np.array([0.2, 0.7, 0.4])
    assert it.jacobian_fd(lambda t: t, y) == pytest.approx(1.0, abs=1e-9)
    assert it.jacobian_fd(lambda t: t[::-1], y) == pytest.approx(1.0, abs=1e-9)


def test_jacobian_fd_rejects_boundary():
    with pytest.raises(ValueError):
        it.jacobian_fd(lambda t: t, np.array([0.0, 0.5]))


# Factor multisets --------------------------------------------------------------

def test_render_order():
    fm = FactorMultiset({(ONE_MINUS_PREFIX, 3): -1, (VAR, 3): 2, (ONE_MINUS_VAR, 2): 1})
    assert fm.render() == "y3^2 * (1-y2)^1 * (1-y1y2y3)^-1"


def test_prefix_of_one_is_one_minus_var():
    assert FactorMultiset({(ONE_MINUS_PREFIX, 1): 2}) == FactorMultiset({(ONE_MINUS_VAR, 1): 2})


@given(st.dictionaries(st.tuples(st.sampled_from([VAR, ONE_MINUS_VAR, ONE_MINUS_PREFIX]), st.integers(1, 3)),
                       st.integers(-3, 3), max_size=5),
       st.dictionaries(st.tuples(st.sampled_from([VAR, ONE_MINUS_VAR, ONE_MINUS_PREFIX]), st.integers(1, 3)),
                       st.integers(-3, 3), max_size=5),
       st.lists(interior, min_size=3, max_size=3))
def test_evaluation_is_multiplicative(d1, d2, y):
    f, g = FactorMultiset(d1), FactorMultiset(d2)
    y = np.array(y)
    assert (f * g).evaluate(y) == pytest.approx(f.evaluate(y) * g.evaluate(y), rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_yprime_prefix_rule(n):
    out = it.pushforward_exponent_map(FactorMultiset({(ONE_MINUS_PREFIX, n): -1}), it.YPRIME, n)
    jac = it.pushforward_exponent_map(FactorMultiset(), it.YPRIME, n)
    assert out == jac * FactorMultiset({(VAR, 1): -1})


@pytest.mark.parametrize("n", [2, 3, 4])
def test_yprime_pushforward_pointwise(n):
    # f(y'(y)) |det dy'/dy| must equal the rewritten multiset at y
    rng = np.random.default_rng(n)
    P = ExponentVectorK.from_flat(n, rng.integers(0, 3, ex.dim(n)))
    fm = it.fm_from_K(P)
    out = it.pushforward_exponent_map(fm, it.YPRIME, n)
    for _ in range(20):
        y = rng.uniform(0.05, 0.95, n)
        lhs = fm.evaluate(it.cov_yprime(y)) * it.jacobian_yprime(y)
        assert out.evaluate(y) == pytest.approx(lhs, rel=1e-10)


def test_sorokin_pushforward_is_K_shaped():
    out = it.pushforward_exponent_map(it.fm_from_K(ex.sorokin(0)), it.YPRIME, 3)
    Q = it.K_from_fm(out, 3)
    assert it.fm_from_K(Q) == out


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_theorem1_pushforward_matches_index_map(n):
    rng = np.random.default_rng(n)
    for _ in range(20):
        p = ExponentVector.from_flat(n, rng.integers(-3, 4, ex.dim(n)))
        out = it.pushforward_exponent_map(it.fm_from_J(p), it.THEOREM1, n)
        assert it.K_from_fm(out, n) == ex.theorem1_map(p)


def test_non_K_shape_is_rejected():
    with pytest.raises(it.NonClosedForm):
        it.K_from_fm(FactorMultiset({(it.D_POLY, 2): 1}), 2)
