"""Exact-rational series evaluation of K(P) and reference constants.

Expanding every ``(1 - y_1..y_k)^-(C_k+1)`` as a binomial series in
``y_1..y_k`` and integrating each variable against the Euler beta integral
gives

    K(P) = sum_{m_2..m_n >= 0} prod_k coeff(C_k, m_k) prod_k beta(A_k + M_k, B_k)

with ``M_k = m_max(k,2) + ... + m_n``.  Writing the sum by shells of total
degree ``s = M_2`` turns the inner sums into a chain: the shell sums are
produced by repeated prefix sums (``C_k >= 0``) or repeated differences
(``C_k <= -2``) of one array, which is how both the exact and the floating
point paths below compute them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exponents import ExponentVectorK, is_finite_K


class NotFinite(ValueError):
    pass


class NoConvergence(ArithmeticError):
    pass


def beta_int(A: int, B: int) -> Fraction:
    """Integral of y^A (1-y)^B over [0, 1]."""
    if A < 0 or B < 0:
        raise ValueError(f"beta_int needs A, B >= 0, got {A}, {B}")
    return Fraction(math.factorial(A) * math.factorial(B), math.factorial(A + B + 1))


def series_coeff(C: int, m: int) -> int:
    """Coefficient of t^m in (1 - t)^-(C+1)."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if C >= 0:
        return math.comb(m + C, m)
    d = -C - 1
    return (-1) ** m * math.comb(d, m) if m <= d else 0


# Shell sums -------------------------------------------------------------------

def _convolve_exact(u: list, C: int) -> list:
    if C >= 0:
        for _ in range(C + 1):
            acc = Fraction(0)
            out = []
            for v in u:
                acc += v
                out.append(acc)
            u = out
    else:
        for _ in range(-C - 1):
            u = [u[0]] + [u[i] - u[i - 1] for i in range(1, len(u))]
    return u


def _convolve_float(u: np.ndarray, C: int) -> np.ndarray:
    if C >= 0:
        for _ in range(C + 1):
            u = np.cumsum(u)
    else:
        for _ in range(-C - 1):
            u = np.concatenate(([u[0]], np.diff(u)))
    return u


def _beta_float(A: int, B: int, M: np.ndarray) -> np.ndarray:
    """beta(A + M, B) = B! / prod_{i=1}^{B+1} (A + M + i) as floats."""
    val = np.full(M.shape, float(math.factorial(B)))
    for i in range(1, B + 2):
        val = val / (A + M + i)
    return val


def shell_sums_exact(P: ExponentVectorK, count: int) -> list[Fraction]:
    """Exact shell sums t_0 .. t_{count-1}."""
    n = P.n
    u = [Fraction(1)] + [Fraction(0)] * (count - 1)
    for k in range(n, 1, -1):
        u = _convolve_exact(u, P.C[k - 2])
        u = [v * beta_int(P.A[k - 1] + M, P.B[k - 1]) if v else v for M, v in enumerate(u)]
    return [v * beta_int(P.A[0] + M, P.B[0]) if v else v for M, v in enumerate(u)]


def shell_sums_float(P: ExponentVectorK, count: int) -> np.ndarray:
    n = P.n
    M = np.arange(count, dtype=float)
    u = np.zeros(count)
    u[0] = 1.0
    for k in range(n, 1, -1):
        u = _convolve_float(u, P.C[k - 2])
        u = u * _beta_float(P.A[k - 1], P.B[k - 1], M)
    return u * _beta_float(P.A[0], P.B[0], M)


def shell_term_bruteforce(P: ExponentVectorK, s: int) -> Fraction:
    """Shell sum t_s by explicit enumeration of (m_2, ..., m_n); reference
    for the chain recursion."""
    n = P.n
    total = Fraction(0)

    def rec(k, remaining, ms):
        nonlocal total
        if k == n:
            ms = ms + [remaining]
            coeff = 1
            for j, m in enumerate(ms, start=2):
                coeff *= series_coeff(P.C[j - 2], m)
            if coeff == 0:
                return
            Mk = [0] * (n + 2)
            for j in range(n, 1, -1):
                Mk[j] = Mk[j + 1] + ms[j - 2]
            Mk[1] = Mk[2]
            term = Fraction(coeff)
            for j in range(1, n + 1):
                term *= beta_int(P.A[j - 1] + Mk[j], P.B[j - 1])
            total += term
            return
        for m in range(remaining + 1):
            rec(k + 1, remaining - m, ms + [m])

    rec(2, s, [])
    return total


# Tail extrapolation -----------------------------------------------------------

def _fit_limit(partial, start, I, J, n_pts=400, offset=0):
    L = np.arange(len(partial), dtype=float) + 1.0 + offset
    idx = np.unique(np.geomspace(start, len(partial) - 1, n_pts).astype(int))
    x = L[idx]
    y = partial[idx]
    scale = x[0]
    cols = [np.ones_like(x)]
    for i in range(1, I + 1):
        for j in range(J + 1):
            cols.append((scale / x) ** i * np.log(x / scale) ** j)
    X = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid ** 2)))


def extrapolate_limit(partial: np.ndarray, start: int, max_log_power: int = 2,
                      max_power: int = 5, offset: int = 0) -> tuple[float, float]:
    """Limit of partial sums S(L) that behave like
    S - sum_{i>=1, j<=J} c_ij L^-i log(L)^j.

    J is the smallest log power whose least-squares residual reaches the
    floating point noise floor (within a factor 2).  ``partial[i]`` is
    S(offset + i + 1); fit windows should span several decades of L.  Returns
    ``(limit, error_estimate)``, the estimate being the spread over
    neighbouring orders, log powers and fit windows.
    """
    start = max(int(start), 1)
    resid = [_fit_limit(partial, start, max_power, J, offset=offset)[1]
             for J in range(max_log_power + 2)]
    floor = min(resid)
    J = next(j for j, r in enumerate(resid) if r <= 2.0 * floor)
    best = _fit_limit(partial, start, max_power, J, offset=offset)[0]
    others = [_fit_limit(partial, start * w, I, JJ, offset=offset)[0]
              for w in (1, 2) for I in (max_power - 1, max_power) for JJ in (J, J + 1)]
    err = max(abs(v - best) for v in others)
    return best, err


# Enclosures -------------------------------------------------------------------

@dataclass(frozen=True)
class RationalEnclosure:
    """Exact partial sum plus a floating tail estimate (not rigorous)."""

    partial_sum: Fraction
    est_tail: float
    radius: float
    shells: int
    rigorous: bool = False

    @property
    def midpoint(self) -> float:
        return float(self.partial_sum) + self.est_tail

    def interval(self) -> tuple[float, float]:
        m = self.midpoint
        return m - self.radius, m + self.radius

    def to_dict(self) -> dict:
        q = self.partial_sum
        return {
            "rational": f"{q.numerator}/{q.denominator}",
            "float": self.midpoint,
            "est_tail": self.est_tail,
            "radius": self.radius,
            "shells": self.shells,
            "rigorous": self.rigorous,
        }


def k_series_value(P: ExponentVectorK, rel_tol: float = 1e-10,
                   exact_shells: int = 200, float_shells: int = 1 << 16,
                   shell_cap: int = 10 ** 4) -> RationalEnclosure:
    """Evaluate K(P) by shell summation.

    Shells ``0 .. exact_shells-1`` are summed exactly.  If three consecutive
    shells fall below ``rel_tol * |partial|`` while decreasing, the tail is
    estimated geometrically from the last two shells.  Otherwise the shells
    are continued in floating point up to ``float_shells`` and the remaining
    tail is extrapolated from the asymptotic shape of the partial sums.
    """
    if not is_finite_K(P):
        raise NotFinite(f"K({P}) is infinite by the finiteness criterion")
    if all(C <= -1 for C in P.C):
        # polynomial integrand: only finitely many nonzero shells
        count = sum(-C - 1 for C in P.C) + 1
        terms = shell_sums_exact(P, count)
        return RationalEnclosure(sum(terms, Fraction(0)), 0.0, 0.0, count, rigorous=True)

    exact_shells = min(exact_shells, shell_cap)
    terms = shell_sums_exact(P, exact_shells)
    partial = Fraction(0)
    small = 0
    for s, t in enumerate(terms):
        partial += t
        if s >= 1 and partial != 0 and abs(t) < rel_tol * abs(partial) and abs(t) < abs(terms[s - 1]):
            small += 1
        else:
            small = 0
        if small >= 3:
            r = float(abs(t) / abs(terms[s - 1]))
            tail = float(t) * r / (1.0 - r)
            # shells decaying like s^-alpha leave a tail near t*s/(alpha-1),
            # which the geometric estimate can miss; cover alpha >= 2
            radius = max(abs(tail), abs(float(t)) * (s + 1))
            return RationalEnclosure(partial, tail, radius, s + 1)

    count = max(float_shells, 16 * exact_shells)
    f = shell_sums_float(P, count)
    tail_f = f[exact_shells:]
    mags = np.abs(tail_f[len(tail_f) // 2:])
    if not np.all(np.diff(mags) <= 1e-300 + 1e-12 * mags[:-1]):
        raise NoConvergence(f"shell sums of K({P}) are not eventually decreasing")
    partial_f = np.cumsum(tail_f)
    limit, err = extrapolate_limit(partial_f, start=max(len(partial_f) // 1024, 8),
                                   max_log_power=P.n - 1, offset=exact_shells)
    radius = err + 1e-15 * abs(limit) * math.sqrt(count)
    return RationalEnclosure(partial, limit, radius, count)


def k_series_float(P: ExponentVectorK, **kw) -> tuple[float, float]:
    enc = k_series_value(P, **kw)
    return enc.midpoint, enc.radius


# Multiple sums -----------------------------------------------------------------

@dataclass(frozen=True)
class MzvSumSpec:
    """sum over l_1 >= l_2 >= ... >= l_depth >= 1 of prod l_i^-exponents[i]."""

    exponents: tuple[int, ...]

    @property
    def depth(self) -> int:
        return len(self.exponents)

    def render(self) -> str:
        idx = [f"l{i}" for i in range(1, self.depth + 1)]
        chain = " >= ".join(idx) + " >= 1"
        den = " ".join(f"{l}^{e}" if e != 1 else l for l, e in zip(idx, self.exponents))
        return f"sum_{{{chain}}} 1/({den})"


def mzv_sum_spec_for_vasilyev(n: int) -> MzvSumSpec:
    if n < 2:
        raise ValueError("n must be >= 2")
    if n % 2:
        return MzvSumSpec((2,) * ((n - 1) // 2) + (1,))
    return MzvSumSpec((2,) * (n // 2))


def _nested_partial_sums(spec: MzvSumSpec, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Partial sums of the outer index up to L, and the inner sums at each l."""
    l = np.arange(1, L + 1, dtype=float)
    inner = np.ones(L)
    for e in reversed(spec.exponents[1:]):
        inner = np.cumsum(inner * l ** -float(e))
    outer = inner * l ** -float(spec.exponents[0])
    return np.cumsum(outer), inner


def mzv_sum_enclosure(spec: MzvSumSpec, rel_tol: float = 1e-10,
                      L: int = 1 << 16, L_cap: int = 1 << 22) -> tuple[float, float]:
    """(value, error estimate) of a non-strict nested sum.

    When every inner exponent is >= 2 the inner sums are bounded and the
    outer tail is bracketed by integral comparison,
    ``inner(L) * T(L) <= tail <= inner(inf) * T(L)`` with
    ``int_{L+1}^inf <= T(L) <= int_L^inf`` of ``t^-s``; the extrapolated value
    is checked against that bracket.
    """
    s = spec.exponents[0]
    if s < 2:
        raise ValueError(f"divergent sum: outer exponent {s} < 2")
    while True:
        partial, inner = _nested_partial_sums(spec, L)
        value, err = extrapolate_limit(partial, start=max(L // 1024, 8), max_log_power=spec.depth)
        if all(e >= 2 for e in spec.exponents[1:]) and spec.depth > 1:
            inner_inf = mzv_sum_enclosure(MzvSumSpec(spec.exponents[1:]), rel_tol, L, L_cap)[0]
        elif spec.depth == 1:
            inner_inf = 1.0
        else:
            inner_inf = None
        if inner_inf is not None:
            lo = partial[-1] + inner[-1] * (L + 1.0) ** (1 - s) / (s - 1)
            hi = partial[-1] + inner_inf * float(L) ** (1 - s) / (s - 1)
            if not lo - 1e-12 <= value <= hi + 1e-12:
                err = max(err, abs(hi - lo))
                value = 0.5 * (lo + hi)
        if err <= rel_tol * abs(value) or L >= L_cap:
            if err > rel_tol * abs(value):
                raise NoConvergence(f"{spec.render()}: error {err:.3g} above tolerance")
            return value, err
        L *= 4


def mzv_sum_eval(spec: MzvSumSpec, rel_tol: float = 1e-10) -> float:
    return mzv_sum_enclosure(spec, rel_tol)[0]


# Reference constants --------------------------------------------------------------

@lru_cache(maxsize=None)
def bernoulli(k: int) -> Fraction:
    """Bernoulli number B_k with B_1 = -1/2."""
    B = [Fraction(1)]
    for m in range(1, k + 1):
        B.append(-sum(math.comb(m + 1, j) * B[j] for j in range(m)) / (m + 1))
    return B[k]


def zeta_ref(s: int, M: int = 32, terms: int = 10) -> float:
    """zeta(s) for integer s >= 2 by Euler-Maclaurin after M direct terms."""
    if s < 2:
        raise ValueError("zeta_ref needs s >= 2")
    head = math.fsum(m ** -float(s) for m in range(1, M))
    tail = [M ** (1.0 - s) / (s - 1), 0.5 * M ** -float(s)]
    rising = 1.0
    for k in range(1, terms + 1):
        # d^(2k-1)/dM^(2k-1) of M^-s is -s(s+1)...(s+2k-2) M^(-s-2k+1)
        rising = s if k == 1 else rising * (s + 2 * k - 3) * (s + 2 * k - 2)
        tail.append(float(bernoulli(2 * k)) / math.factorial(2 * k) * rising * M ** (-s - 2 * k + 1.0))
    return math.fsum([head] + tail)


def eta_ref(s: int) -> float:
    """Alternating zeta (1 - 2^(1-s)) zeta(s)."""
    return (1.0 - 2.0 ** (1 - s)) * zeta_ref(s)
