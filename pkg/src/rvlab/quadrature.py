"""Numerical integration over the open unit cube and a 1-D adaptive rule."""
from __future__ import annotations

import heapq
import math
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

from . import integrands
from .exponents import ExponentVector, ExponentVectorK, is_finite_J, is_finite_K, is_finite_L

NUDGE = 1e-15


class InfiniteByCriterion(ValueError):
    pass


class MaxDepthExceeded(ArithmeticError):
    pass


@dataclass(frozen=True)
class QmcEstimate:
    mean: float
    stderr: float
    points_per_shift: int
    shifts: int
    discarded_samples: int = 0
    flags: tuple[str, ...] = field(default=())

    @property
    def reliable(self) -> bool:
        return "UNRELIABLE" not in self.flags

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "points": self.points_per_shift,
            "shifts": self.shifts,
            "discarded": self.discarded_samples,
            "flags": list(self.flags),
        }


# Smoothing maps of [0,1] onto itself whose derivative vanishes at both ends;
# they damp the boundary singularities of the integrands.
def _identity(t):
    return t, np.ones_like(t)


def _cubic(t):
    return t * t * (3.0 - 2.0 * t), 6.0 * t * (1.0 - t)


def _quintic(t):
    return t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t), 30.0 * t * t * (1.0 - t) ** 2


TRANSFORMS = {"none": _identity, "cubic": _cubic, "quintic": _quintic}


def sobol_points(n: int, m: int) -> np.ndarray:
    """The first 2^m points of the unscrambled Sobol' sequence in dimension n."""
    return qmc.Sobol(d=n, scramble=False).random_base2(m)


def qmc_integrate(f: Callable, n: int, points_per_shift: int = 1 << 16, shifts: int = 16,
                  seed: int | np.random.SeedSequence = 0,
                  transform: str = "quintic") -> QmcEstimate:
    """Randomly shifted Sobol' integration of ``f`` over (0,1)^n.

    ``f`` takes an ``(m, n)`` array of points and returns ``m`` values.  Each
    shift is an independent uniform vector added modulo 1; the estimate is
    the mean of the per-shift means and the standard error is their sample
    standard deviation over sqrt(shifts).  Non-finite samples are dropped
    and counted.
    """
    m = int(round(math.log2(points_per_shift)))
    if 1 << m != points_per_shift:
        raise ValueError("points_per_shift must be a power of two")
    base = sobol_points(n, m)
    rng = np.random.default_rng(seed)
    phi = TRANSFORMS[transform]
    means = []
    discarded = 0
    for _ in range(shifts):
        t = (base + rng.random(n)) % 1.0
        np.clip(t, NUDGE, 1.0 - NUDGE, out=t)
        x, w = phi(t)
        np.clip(x, NUDGE, 1.0 - NUDGE, out=x)
        with np.errstate(all="ignore"):
            vals = np.asarray(f(x), dtype=float) * np.prod(w, axis=1)
        ok = np.isfinite(vals)
        bad = int(vals.size - ok.sum())
        discarded += bad
        # dropped samples count as zero so every shift averages over the same set
        means.append(vals[ok].sum() / vals.size if bad else vals.mean())
    means = np.array(means)
    stderr = float(means.std(ddof=1) / math.sqrt(shifts)) if shifts > 1 else float("inf")
    flags = []
    if discarded > 1e-4 * shifts * points_per_shift:
        flags.append("UNRELIABLE")
    return QmcEstimate(float(means.mean()), stderr, points_per_shift, shifts, discarded, tuple(flags))


def derive_seed(master: int, *key) -> np.random.SeedSequence:
    """Per-integral seed from a master seed and a hashable description."""
    digest = zlib.crc32(repr(key).encode())
    return np.random.SeedSequence([int(master) & 0xFFFFFFFF, digest])


def estimate_family_value(family: str, p, points_per_shift: int = 1 << 16, shifts: int = 16,
                          seed: int = 0, force: bool = False,
                          transform: str = "quintic") -> QmcEstimate:
    """QMC value of J(p), K(P) or L(p); refuses infinite integrals unless
    ``force`` is set."""
    family = family.upper()
    if family == "J":
        finite, fn = is_finite_J(p), integrands.integrand_J
    elif family == "K":
        finite, fn = is_finite_K(p), integrands.integrand_K
    elif family == "L":
        finite, fn = is_finite_L(p)[0], integrands.integrand_L
    else:
        raise ValueError(f"unknown family {family!r}")
    if not finite and not force:
        raise InfiniteByCriterion(f"{family}({p}) is infinite by its finiteness criterion")
    ss = derive_seed(seed, family, p.flat())
    return qmc_integrate(lambda x: fn(p, x), p.n, points_per_shift, shifts, ss, transform)


def combined_error(*errors: float) -> float:
    return math.sqrt(sum(e * e for e in errors))


def agree(x: float, ex: float, y: float, ey: float, sigmas: float = 3.0) -> bool:
    return abs(x - y) <= sigmas * combined_error(ex, ey)


def ratio_with_error(num: QmcEstimate, den: QmcEstimate) -> tuple[float, float]:
    r = num.mean / den.mean
    rel = combined_error(num.stderr / abs(num.mean), den.stderr / abs(den.mean))
    return r, abs(r) * rel


# 1-D adaptive Gauss-Kronrod ------------------------------------------------------

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
# the 7-point Gauss nodes are the odd-indexed Kronrod nodes
_WG_FULL = np.zeros(15)
_WG_FULL[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(f, a, b):
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    fx = np.asarray(f(c + h * _NODES), dtype=float)
    k = h * float(_WK @ fx)
    g = h * float(_WG_FULL @ fx)
    return k, abs(k - g)


def adaptive_1d(f: Callable, a: float, b: float, abs_tol: float = 1e-12,
                max_depth: int = 40) -> float:
    """Integrate ``f`` (vectorized) over (a, b) by globally adaptive bisection
    with the 7/15 Gauss-Kronrod pair; endpoints are never evaluated."""
    val, err = _gk15(f, a, b)
    heap = [(-err, a, b, val, 0)]
    total, total_err = val, err
    while total_err > abs_tol:
        neg_err, lo, hi, v, depth = heapq.heappop(heap)
        if depth >= max_depth:
            raise MaxDepthExceeded(f"depth {max_depth} reached, error {total_err:.3g}")
        mid = 0.5 * (lo + hi)
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        total += v1 + v2 - v
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, lo, mid, v1, depth + 1))
        heapq.heappush(heap, (-e2, mid, hi, v2, depth + 1))
    return math.fsum(item[3] for item in heap)
