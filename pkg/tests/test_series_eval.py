import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from oracles import apery_zeta3, beukers_value, machin_pi
from rvlab import exponents as ex
from rvlab import series_eval as se
from rvlab.exponents import ExponentVectorK

PI = machin_pi()
ZETA2 = PI ** 2 / 6
ZETA3 = apery_zeta3()
ZETA4 = PI ** 4 / 90


def test_beta_int_examples():
    assert se.beta_int(0, 0) == 1
    assert se.beta_int(1, 1) == Fraction(1, 6)
    assert se.beta_int(2, 1) == Fraction(1, 12)
    with pytest.raises(ValueError):
        se.beta_int(-1, 0)


def test_series_coeff_examples():
    assert all(se.series_coeff(0, m) == 1 for m in range(10))
    assert se.series_coeff(1, 3) == 4
    assert se.series_coeff(-1, 0) == 1
    assert all(se.series_coeff(-1, m) == 0 for m in range(1, 6))
    # (1 - t)^2 = 1 - 2t + t^2
    assert [se.series_coeff(-3, m) for m in range(4)] == [1, -2, 1, 0]


@pytest.mark.parametrize("P", [
    ex.sorokin(0), ex.sorokin(1),
    ExponentVectorK(3, (1, 0, 2), (2, 1, 0), (1, -1)),
    ExponentVectorK(4, (0, 1, 0, 1), (2, 0, 1, 0), (1, -2, 0)),
])
def test_shell_recursion_matches_enumeration(P):
    exact = se.shell_sums_exact(P, 9)
    assert exact == [se.shell_term_bruteforce(P, s) for s in range(9)]
    np.testing.assert_allclose(se.shell_sums_float(P, 9), [float(t) for t in exact], rtol=1e-13)


def test_zeta2_from_K_zero():
    enc = se.k_series_value(ExponentVectorK.from_flat(2, [0] * 5), rel_tol=1e-10)
    assert abs(enc.midpoint - ZETA2) < 1e-8
    assert abs(enc.midpoint - ZETA2) <= enc.radius + 1e-15


def test_polynomial_case_is_exact():
    enc = se.k_series_value(ExponentVectorK(2, (0, 0), (0, 0), (-1,)))
    assert enc.partial_sum == 1 and enc.est_tail == 0 and enc.rigorous


def _sympy_K(P):
    ys = sp.symbols(f"y1:{P.n + 1}")
    f = sp.Integer(1)
    u = sp.Integer(1)
    for k, y in enumerate(ys, start=1):
        f *= y ** P.A[k - 1] * (1 - y) ** P.B[k - 1]
        u *= y
        if k >= 2:
            f *= (1 - u) ** (-P.C[k - 2] - 1)
    for y in ys:
        f = sp.integrate(sp.expand(f), (y, 0, 1))
    return Fraction(int(sp.numer(f)), int(sp.denom(f)))


def test_polynomial_cases_match_symbolic_integration():
    rng = np.random.default_rng(3)
    for _ in range(10):
        n = int(rng.integers(2, 4))
        P = ExponentVectorK(n, rng.integers(0, 3, n), rng.integers(0, 3, n), rng.integers(-3, 0, n - 1))
        assert se.k_series_value(P).partial_sum == _sympy_K(P)


@pytest.mark.parametrize("N", [0, 1, 2])
def test_sorokin_values_match_apery(N):
    enc = se.k_series_value(ex.sorokin(N), rel_tol=1e-12)
    ref = beukers_value(N)
    assert abs(enc.midpoint - ref) <= max(enc.radius, 1e-13 * ref) + 1e-15 * ref


def test_partial_sums_monotone_for_nonnegative_C():
    terms = se.shell_sums_exact(ex.sorokin(1), 50)
    assert all(t >= 0 for t in terms)


def test_not_finite_raises():
    with pytest.raises(se.NotFinite):
        se.k_series_value(ExponentVectorK(2, (0, 0), (0, 0), (1,)))


def test_value_invariant_under_round_trip():
    P = ExponentVectorK(3, (1, 0, 2), (2, 1, 1), (1, 0))
    Q = ex.theorem1_map(ex.theorem1_inverse(P))
    assert se.k_series_value(P) == se.k_series_value(Q)


def test_enclosure_serialization():
    d = se.k_series_value(ExponentVectorK(2, (1, 0), (0, 0), (-1,))).to_dict()
    assert set(d) >= {"rational", "float", "est_tail", "shells", "rigorous"}
    assert d["rational"] == "1/2" and d["rigorous"] is True


# Multiple sums -------------------------------------------------------------------

def test_mzv_specs():
    assert se.mzv_sum_spec_for_vasilyev(2).exponents == (2,)
    assert se.mzv_sum_spec_for_vasilyev(3).exponents == (2, 1)
    assert se.mzv_sum_spec_for_vasilyev(4).exponents == (2, 2)
    assert se.mzv_sum_spec_for_vasilyev(5).exponents == (2, 2, 1)
    assert se.mzv_sum_spec_for_vasilyev(3).render() == "sum_{l1 >= l2 >= 1} 1/(l1^2 l2)"


def test_mzv_zeta2():
    assert se.mzv_sum_eval(se.MzvSumSpec((2,))) == pytest.approx(ZETA2, rel=1e-10)


def test_mzv_depth2_odd_is_twice_zeta3():
    # sum_{l1 >= l2} 1/(l1^2 l2) = zeta(2,1) + zeta(3) = 2 zeta(3)
    v = se.mzv_sum_eval(se.MzvSumSpec((2, 1)))
    assert v == pytest.approx(2 * ZETA3, rel=1e-10)
    assert v != pytest.approx(ZETA3, rel=1e-3)


def test_mzv_depth2_even():
    # non-strict zeta*(2,2) = (zeta(2)^2 + zeta(4)) / 2
    v = se.mzv_sum_eval(se.MzvSumSpec((2, 2)))
    assert v == pytest.approx((ZETA2 ** 2 + ZETA4) / 2, rel=1e-10)


def test_mzv_divergent_rejected():
    with pytest.raises(ValueError):
        se.mzv_sum_eval(se.MzvSumSpec((1, 2)))


def test_vasilyev_n4_series_matches_sum():
    enc = se.k_series_value(ex.vasilyev_K(4, 0), rel_tol=1e-10)
    v, err = se.mzv_sum_enclosure(se.mzv_sum_spec_for_vasilyev(4))
    assert enc.midpoint == pytest.approx(v, rel=1e-9)
    # zeta(2)^2 = 5/2 zeta(4), so the sum is 7/4 zeta(4) = 2 eta(4)
    assert v == pytest.approx(2 * (1 - 2 ** -3) * ZETA4, rel=1e-10)


# Reference constants -----------------------------------------------------------------

def test_zeta_ref_against_independent_oracles():
    assert abs(se.zeta_ref(2) - ZETA2) < 1e-12
    assert abs(se.zeta_ref(3) - ZETA3) < 1e-12
    assert abs(se.zeta_ref(4) - ZETA4) < 1e-12


def test_zeta_ref_two_strategies_agree():
    # brute force with a two-term tail correction, M = 10^5
    M = 10 ** 5
    brute = math.fsum(m ** -3.0 for m in range(1, M)) + M ** -2 / 2 + M ** -3 / 2
    assert abs(se.zeta_ref(3) - brute) < 1e-12


def test_eta():
    assert se.eta_ref(2) == pytest.approx(PI ** 2 / 12, rel=1e-14)
