import math

import numpy as np
import pytest

from oracles import beukers_value, machin_pi
from rvlab import exponents as ex
from rvlab import quadrature as qd
from rvlab import series_eval as se
from rvlab.checks import beta_contiguity_case
from rvlab.exponents import ExponentVector, ExponentVectorK

ZETA2 = machin_pi() ** 2 / 6


def test_constant():
    est = qd.qmc_integrate(lambda x: np.ones(len(x)), 3, 1 << 10, 8, transform="none")
    assert est.mean == pytest.approx(1.0, abs=1e-12)
    assert est.stderr < 1e-12


def test_constant_under_smoothing_is_within_error():
    # the smoothing weights integrate to 1 only up to the QMC error
    est = qd.qmc_integrate(lambda x: np.ones(len(x)), 3, 1 << 16, 16)
    assert abs(est.mean - 1.0) <= 3 * est.stderr


def test_product_of_coordinates():
    est = qd.qmc_integrate(lambda x: np.prod(x, axis=1), 3, 1 << 12, 16)
    assert abs(est.mean - 0.125) <= 3 * est.stderr


@pytest.mark.parametrize("transform", sorted(qd.TRANSFORMS))
def test_transforms_preserve_integral(transform):
    est = qd.qmc_integrate(lambda x: x[:, 0] ** 2 + x[:, 1], 2, 1 << 12, 16, transform=transform)
    assert abs(est.mean - (1 / 3 + 1 / 2)) <= 4 * est.stderr + 1e-12


def test_deterministic():
    f = lambda x: 1 / (1 - x[:, 0] * x[:, 1])
    a = qd.qmc_integrate(f, 2, 1 << 10, 8, seed=42)
    b = qd.qmc_integrate(f, 2, 1 << 10, 8, seed=42)
    assert a == b


def test_points_must_be_power_of_two():
    with pytest.raises(ValueError):
        qd.qmc_integrate(lambda x: x[:, 0], 1, 1000, 4)


def test_unreliable_flag():
    f = lambda x: np.where(x[:, 0] < 0.5, np.nan, 1.0)
    est = qd.qmc_integrate(f, 1, 1 << 10, 4, transform="none")
    assert not est.reliable and est.discarded_samples > 0


def test_singular_integrand_has_no_discards():
    est = qd.estimate_family_value("K", ex.sorokin(0), 1 << 12, 8)
    assert est.discarded_samples == 0 and est.reliable


def test_doubling_points_is_stable():
    for fam, p in (("K", ex.sorokin(1)), ("L", ex.beukers(1)), ("J", ex.beukers(0))):
        small = qd.estimate_family_value(fam, p, 1 << 12, 16)
        big = qd.estimate_family_value(fam, p, 1 << 13, 16)
        assert abs(big.mean - small.mean) <= 4 * small.stderr


def test_seed_derivation_is_stable():
    a = qd.derive_seed(0, "K", (1, 2)).generate_state(2)
    b = qd.derive_seed(0, "K", (1, 2)).generate_state(2)
    c = qd.derive_seed(1, "K", (1, 2)).generate_state(2)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


# Family values ----------------------------------------------------------------------

def test_L_zero_is_zeta2():
    est = qd.estimate_family_value("L", ExponentVector.from_flat(2, [0] * 5))
    assert abs(est.mean - ZETA2) <= 3 * est.stderr


def test_K_zero_matches_series():
    P = ExponentVectorK.from_flat(2, [0] * 5)
    est = qd.estimate_family_value("K", P)
    enc = se.k_series_value(P)
    assert qd.agree(est.mean, est.stderr, enc.midpoint, enc.radius)


@pytest.mark.parametrize("N", [0, 1])
def test_J_beukers_matches_apery(N):
    est = qd.estimate_family_value("J", ex.beukers(N))
    assert abs(est.mean - beukers_value(N)) <= 3 * est.stderr


def test_infinite_by_criterion():
    p = ExponentVector(2, (0, 0), (0, 0), (1,))
    with pytest.raises(qd.InfiniteByCriterion):
        qd.estimate_family_value("L", p)
    est = qd.estimate_family_value("L", p, 1 << 10, 4, force=True)
    assert est.mean > 0


def _median_value(p, m, seeds=range(5)):
    return float(np.median([qd.estimate_family_value("L", p, 1 << m, 8, seed=s, force=True).mean
                            for s in seeds]))


@pytest.mark.slow
@pytest.mark.parametrize("p", [
    ExponentVector(2, (0, 0), (0, 0), (1,)),
    ExponentVector(2, (0, 0), (0, 1), (2,)),
    ExponentVector(3, (0, 0, 0), (0, 0, 0), (0, 1)),
])
def test_divergent_L_grows_with_sample_size(p):
    assert not ex.is_finite_L(p)[0]
    assert _median_value(p, 19) > 1.2 * _median_value(p, 8)


def test_finite_L_control_does_not_grow():
    p = ExponentVector(3, (1, 0, 0), (0, 0, 0), (1, 0))
    assert ex.is_finite_L(p)[0]
    assert _median_value(p, 16) == pytest.approx(_median_value(p, 8), rel=1e-2)


def test_unknown_family():
    with pytest.raises(ValueError):
        qd.estimate_family_value("M", ex.beukers(0))


# 1-D rule ----------------------------------------------------------------------------

def test_adaptive_linear():
    assert qd.adaptive_1d(lambda x: x, 0.0, 1.0) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("a", range(5))
@pytest.mark.parametrize("b", range(5))
def test_adaptive_beta(a, b):
    v = qd.adaptive_1d(lambda x: x ** a * (1 - x) ** b, 0.0, 1.0)
    assert v == pytest.approx(float(se.beta_int(a, b)), abs=1e-10)


def test_adaptive_endpoint_singularity():
    # integral of log x over (0, 1) is -1; the endpoint is never evaluated
    assert qd.adaptive_1d(np.log, 0.0, 1.0, abs_tol=1e-10) == pytest.approx(-1.0, abs=1e-9)


def test_adaptive_max_depth():
    with pytest.raises(qd.MaxDepthExceeded):
        qd.adaptive_1d(lambda x: 1 / x, 0.0, 1.0, abs_tol=1e-12, max_depth=10)


@pytest.mark.parametrize("a,b,c", [(0, 0, 0), (2, 1, 3), (3, 3, 2), (1, 3, 0)])
@pytest.mark.parametrize("beta", [-0.9, -0.5, 0.5, 2.0])
def test_beta_contiguity(a, b, c, beta):
    lhs, rhs = beta_contiguity_case(a, b, c, beta)
    assert rhs == pytest.approx(lhs, rel=1e-8)


def test_combined_error():
    assert qd.combined_error(3.0, 4.0) == 5.0
    r, err = qd.ratio_with_error(qd.QmcEstimate(2.0, 0.02, 1, 1), qd.QmcEstimate(1.0, 0.01, 1, 1))
    assert r == 2.0 and err == pytest.approx(2 * math.sqrt(2) * 0.01)
