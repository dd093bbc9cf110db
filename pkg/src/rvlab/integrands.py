"""Pointwise integrands, the two changes of variables, and symbolic factor
rewriting.

Points are numpy arrays whose last axis has length n, so every function
here works on a single point ``x.shape == (n,)`` or on a batch
``x.shape == (m, n)``.  Coordinates are 0-based in code (``x[..., k-1]`` is
x_k).
"""
from __future__ import annotations

from collections import Counter
from typing import Callable, Iterable, Mapping

import numpy as np

from .exponents import ExponentVector, ExponentVectorK

TINY = 1e-300


class NonFiniteSample(ArithmeticError):
    """A base at or below TINY was raised to a negative power."""


class NonClosedForm(ValueError):
    """A rewritten factor left the atomic family."""


# Denominator polynomials ------------------------------------------------------

def eval_D(x, k: int):
    """D_k(x) = sum_{j<=k} (-1)^j x_n x_{n-1} ... x_{n-j+1}, by the recurrence
    D_k = 1 - x_n * D'_{k-1} where D' is built from x_{n-1}, x_{n-2}, ..."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if not 0 <= k <= n:
        raise ValueError(f"k={k} out of range 0..{n}")
    # Horner form: 1 - x_n (1 - x_{n-1} (1 - ... (1 - x_{n-k+1})))
    val = np.ones(x.shape[:-1])
    for i in range(n - k, n):
        val = 1.0 - x[..., i] * val
    return val if k else np.ones(x.shape[:-1])


def eval_D_direct(x, k: int):
    """Direct alternating sum; reference for ``eval_D``."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    total = np.ones(x.shape[:-1])
    prod = np.ones(x.shape[:-1])
    for j in range(1, k + 1):
        prod = prod * x[..., n - j]
        total = total + (-1) ** j * prod
    return total


def eval_delta(x, k: int):
    """delta_k = 1 - x_k delta_{k-1}, delta_0 = 1."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if not 0 <= k <= n:
        raise ValueError(f"k={k} out of range 0..{n}")
    val = np.ones(x.shape[:-1])
    for i in range(k):
        val = 1.0 - x[..., i] * val
    return val


def _all_D(x):
    n = x.shape[-1]
    out = [np.ones(x.shape[:-1])]
    # D_k for increasing k extends the Horner chain on the inside, so build
    # each one separately; n is small.
    for k in range(1, n + 1):
        out.append(eval_D(x, k))
    return out


def _all_delta(x):
    n = x.shape[-1]
    out = [np.ones(x.shape[:-1])]
    for i in range(n):
        out.append(1.0 - x[..., i] * out[-1])
    return out


def _power(base, e: int):
    """base**e; with e < 0 a base <= TINY raises for a single point and
    gives NaN inside a batch (the quadrature layer counts those)."""
    if e >= 0:
        return base ** e
    bad = base <= TINY
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = 1.0 / base ** (-e)
    if np.ndim(out) == 0:
        if bad:
            raise NonFiniteSample("non-positive base with negative exponent")
        return out
    return np.where(bad, np.nan, out)


# Integrands -------------------------------------------------------------------

def _monomials(x, a, b):
    val = np.ones(x.shape[:-1])
    for k in range(x.shape[-1]):
        val = val * _power(x[..., k], a[k]) * _power(1.0 - x[..., k], b[k])
    return val


def _parity_correction(k: int, n: int) -> int:
    """Extra power of D_k in J: +1 for even k in 2..n-2, -1 for odd k in
    3..n-1, and -1 for k = n."""
    if k == n:
        return -1
    if k % 2 == 0 and k <= n - 2:
        return 1
    if k % 2 == 1 and 3 <= k <= n - 1:
        return -1
    return 0


def integrand_J(p: ExponentVector, x):
    x = np.asarray(x, dtype=float)
    n = p.n
    D = _all_D(x)
    val = _monomials(x, p.a, p.b)
    for k in range(2, n + 1):
        e = -p.C(k) + _parity_correction(k, n)
        val = val * _power(D[k], e)
    return val


def integrand_K(P: ExponentVectorK, y):
    y = np.asarray(y, dtype=float)
    val = _monomials(y, P.A, P.B)
    u = y[..., 0]
    for k in range(2, P.n + 1):
        u = u * y[..., k - 1]
        val = val * _power(1.0 - u, -(P.C[k - 2] + 1))
    return val


def integrand_L(p: ExponentVector, x):
    x = np.asarray(x, dtype=float)
    delta = _all_delta(x)
    val = _monomials(x, p.a, p.b)
    for k in range(2, p.n + 1):
        e = -p.C(k) - (1 if k == p.n else 0)
        val = val * _power(delta[k], e)
    return val


# Changes of variables -------------------------------------------------------------

def _as_points(y):
    """Float array, keeping extended or object (e.g. mpmath) dtypes."""
    y = np.asarray(y)
    return y if y.dtype.kind in "fO" else y.astype(float)


def _prefixes(y):
    return np.cumprod(y, axis=-1)


def _one_minus_prefixes(y):
    """1 - y_1..y_j for every j, without cancellation:
    w_j = w_{j-1} + y_1..y_{j-1} (1 - y_j)."""
    u = _prefixes(y)
    w = np.empty_like(u)
    w[..., 0] = 1.0 - y[..., 0]
    for j in range(1, y.shape[-1]):
        w[..., j] = w[..., j - 1] + u[..., j - 1] * (1.0 - y[..., j])
    return w


def cov_theorem1(y):
    """x_k = y_{n+1-k} when k = n mod 2, else
    x_k = (1 - y_1..y_{n-k}) y_{n+1-k} / (1 - y_1..y_{n+1-k})."""
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    u = _prefixes(y)
    x = np.empty_like(y)
    for k in range(1, n + 1):
        j = n + 1 - k
        if (k - n) % 2 == 0:
            x[..., k - 1] = y[..., j - 1]
        else:
            x[..., k - 1] = (1.0 - u[..., j - 2]) * y[..., j - 1] / (1.0 - u[..., j - 1])
    return x


def jacobian_theorem1(y):
    """|det d(x)/d(y)| for ``cov_theorem1``: x_{n+1-j} depends on y_1..y_j
    only, so the determinant is the product of prod_{j even}
    (1 - u_{j-1}) / (1 - u_j)^2 with u_j = y_1..y_j."""
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    u = _prefixes(y)
    val = np.ones(y.shape[:-1])
    for j in range(2, n + 1, 2):
        val = val * (1.0 - u[..., j - 2]) / (1.0 - u[..., j - 1]) ** 2
    return val


def cov_yprime(y):
    """y'_k = (1 - y_1..y_{n-k+1}) / (1 - y_1..y_{n-k+2}), y_{n+1} = 0.

    Works in the dtype of ``y``; pass mpmath numbers (object array) for
    round trips near the corner y = (1, .., 1), where doubles lose digits."""
    y = _as_points(y)
    n = y.shape[-1]
    w = _one_minus_prefixes(y)
    out = np.empty_like(y)
    for k in range(1, n + 1):
        num = w[..., n - k]
        den = 1.0 if k == 1 else w[..., n - k + 1]
        out[..., k - 1] = num / den
    return out


def jacobian_yprime(y):
    """|det dy'/dy| = prod_{j<n} u_j / prod_{2<=i<=n} (1 - u_i)."""
    y = np.asarray(y, dtype=float)
    u = _prefixes(y)
    n = y.shape[-1]
    return np.prod(u[..., : n - 1], axis=-1) / np.prod(1.0 - u[..., 1:], axis=-1)


def jacobian_fd(fmap: Callable, y, h: float = 1e-6) -> float:
    """|det| of the central-difference Jacobian of ``fmap`` at a single point."""
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    step = min(h, 0.5 * float(np.min(y)), 0.5 * float(np.min(1.0 - y)))
    if step <= 0:
        raise ValueError("finite-difference stencil leaves the open cube")
    jac = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = step
        jac[:, i] = (np.asarray(fmap(y + e)) - np.asarray(fmap(y - e))) / (2 * step)
    return abs(float(np.linalg.det(jac)))


# Symbolic factors ----------------------------------------------------------------

VAR = "var"                  # y_j
ONE_MINUS_VAR = "1-var"      # 1 - y_j
ONE_MINUS_PREFIX = "1-pre"   # 1 - y_1 ... y_j
D_POLY = "D"                 # D_j(x); source side of the index-map rewrite only

_ORDER = {VAR: 0, ONE_MINUS_VAR: 1, ONE_MINUS_PREFIX: 2, D_POLY: 3}


def _canon(kind: str, j: int):
    if kind == ONE_MINUS_PREFIX and j == 1:
        return (ONE_MINUS_VAR, 1)
    return (kind, j)


class FactorMultiset(Mapping):
    """A product of atomic factors with integer exponents.

    Keys are ``(kind, j)`` pairs, e.g. ``(ONE_MINUS_PREFIX, 3)`` for
    ``1 - y1 y2 y3``.  Zero exponents are dropped; ``1 - y_1`` has the single
    key ``(ONE_MINUS_VAR, 1)``.
    """

    def __init__(self, items: Mapping | Iterable = ()):
        c = Counter()
        pairs = items.items() if isinstance(items, Mapping) else items
        for (kind, j), e in pairs:
            c[_canon(kind, j)] += int(e)
        self._d = {k: v for k, v in c.items() if v != 0}

    def __getitem__(self, key):
        return self._d.get(_canon(*key), 0)

    def __iter__(self):
        return iter(sorted(self._d, key=lambda t: (_ORDER[t[0]], t[1])))

    def __len__(self):
        return len(self._d)

    def __eq__(self, other):
        if isinstance(other, FactorMultiset):
            return self._d == other._d
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._d.items()))

    def __mul__(self, other: "FactorMultiset") -> "FactorMultiset":
        return FactorMultiset(list(self._d.items()) + list(other._d.items()))

    def __pow__(self, e: int) -> "FactorMultiset":
        return FactorMultiset({k: v * e for k, v in self._d.items()})

    def __repr__(self):
        return f"FactorMultiset({self.render()})"

    def render(self) -> str:
        if not self._d:
            return "1"
        parts = []
        for kind, j in self:
            e = self._d[(kind, j)]
            if kind == VAR:
                base = f"y{j}"
            elif kind == ONE_MINUS_VAR:
                base = f"(1-y{j})"
            elif kind == ONE_MINUS_PREFIX:
                base = "(1-" + "".join(f"y{i}" for i in range(1, j + 1)) + ")"
            else:
                base = f"D{j}"
            parts.append(f"{base}^{e}")
        return " * ".join(parts)

    def evaluate(self, y):
        y = np.asarray(y, dtype=float)
        u = _prefixes(y)
        val = np.ones(y.shape[:-1])
        for (kind, j), e in self._d.items():
            if kind == VAR:
                base = y[..., j - 1]
            elif kind == ONE_MINUS_VAR:
                base = 1.0 - y[..., j - 1]
            elif kind == ONE_MINUS_PREFIX:
                base = 1.0 - u[..., j - 1]
            else:
                base = eval_D(y, j)
            val = val * _power(base, e)
        return val


def _prefix_product(j: int) -> FactorMultiset:
    """u_j = y_1 ... y_j as a multiset."""
    return FactorMultiset({(VAR, i): 1 for i in range(1, j + 1)})


def fm_from_K(P: ExponentVectorK) -> FactorMultiset:
    d = {}
    for k in range(1, P.n + 1):
        d[(VAR, k)] = P.A[k - 1]
        d[(ONE_MINUS_VAR, k)] = P.B[k - 1]
    for k in range(2, P.n + 1):
        d[(ONE_MINUS_PREFIX, k)] = -(P.C[k - 2] + 1)
    return FactorMultiset(d)


def K_from_fm(fm: FactorMultiset, n: int) -> ExponentVectorK:
    """Read a K exponent vector back off a multiset; raises NonClosedForm if
    a factor outside the K shape is present."""
    allowed = {(VAR, k) for k in range(1, n + 1)}
    allowed |= {(ONE_MINUS_VAR, k) for k in range(1, n + 1)}
    allowed |= {(ONE_MINUS_PREFIX, k) for k in range(2, n + 1)}
    extra = [key for key in fm if key not in allowed]
    if extra:
        raise NonClosedForm(f"factors {extra} are not of K shape")
    A = [fm[(VAR, k)] for k in range(1, n + 1)]
    B = [fm[(ONE_MINUS_VAR, k)] for k in range(1, n + 1)]
    C = [-fm[(ONE_MINUS_PREFIX, k)] - 1 for k in range(2, n + 1)]
    return ExponentVectorK(n, A, B, C)


def fm_from_J(p: ExponentVector) -> FactorMultiset:
    """The J integrand as a multiset over the x-side atoms x_k, 1-x_k, D_k."""
    n = p.n
    d = {}
    for k in range(1, n + 1):
        d[(VAR, k)] = p.A(k)
        d[(ONE_MINUS_VAR, k)] = p.B(k)
    for k in range(2, n + 1):
        e = -p.C(k) + _parity_correction(k, n)
        d[(D_POLY, k)] = e
    return FactorMultiset(d)


def _rule_theorem1(kind: str, k: int, n: int) -> FactorMultiset:
    """An x-side atom rewritten in y under ``cov_theorem1``."""
    j = n + 1 - k
    if kind == VAR:
        if j % 2 == 1:
            return FactorMultiset({(VAR, j): 1})
        return FactorMultiset({(ONE_MINUS_PREFIX, j - 1): 1, (VAR, j): 1,
                               (ONE_MINUS_PREFIX, j): -1})
    if kind == ONE_MINUS_VAR:
        if j % 2 == 1:
            return FactorMultiset({(ONE_MINUS_VAR, j): 1})
        return FactorMultiset({(ONE_MINUS_VAR, j): 1, (ONE_MINUS_PREFIX, j): -1})
    if kind == D_POLY:
        # D_k(x) = (1 - y_1) prod_{2<=i<=k} (1 - y_1..y_i)^((-1)^(i+1))
        if k == 0:
            return FactorMultiset()
        d = {(ONE_MINUS_VAR, 1): 1}
        for i in range(2, k + 1):
            d[(ONE_MINUS_PREFIX, i)] = 1 if i % 2 == 1 else -1
        return FactorMultiset(d)
    raise NonClosedForm(f"no closed rewrite of ({kind}, {k}) under THEOREM1")


def _jacobian_fm_theorem1(n: int) -> FactorMultiset:
    d = Counter()
    for j in range(2, n + 1, 2):
        d[_canon(ONE_MINUS_PREFIX, j - 1)] += 1
        d[(ONE_MINUS_PREFIX, j)] -= 2
    return FactorMultiset(d)


def _rule_yprime(kind: str, k: int, n: int) -> FactorMultiset:
    """A y'-side atom rewritten in y under ``cov_yprime``."""
    def omp(j):  # 1 - u_j, with u_{n+1} = 0
        return FactorMultiset() if j == n + 1 else FactorMultiset({(ONE_MINUS_PREFIX, j): 1})

    if kind == VAR:
        return omp(n - k + 1) * omp(n - k + 2) ** -1
    if kind == ONE_MINUS_VAR:
        out = _prefix_product(n - k + 1) * omp(n - k + 2) ** -1
        if n - k + 2 <= n:
            out = out * FactorMultiset({(ONE_MINUS_VAR, n - k + 2): 1})
        return out
    if kind == ONE_MINUS_PREFIX:
        return _prefix_product(n - k + 1)
    raise NonClosedForm(f"no closed rewrite of ({kind}, {k}) under YPRIME")


def _jacobian_fm_yprime(n: int) -> FactorMultiset:
    out = FactorMultiset()
    for j in range(1, n):
        out = out * _prefix_product(j)
    for i in range(2, n + 1):
        out = out * FactorMultiset({(ONE_MINUS_PREFIX, i): -1})
    return out


THEOREM1 = "THEOREM1"
YPRIME = "YPRIME"

_RULES = {
    THEOREM1: (_rule_theorem1, _jacobian_fm_theorem1),
    YPRIME: (_rule_yprime, _jacobian_fm_yprime),
}


def pushforward_exponent_map(fm: FactorMultiset, map_id: str, n: int) -> FactorMultiset:
    """Substitute the change of variables ``map_id`` into ``fm`` and multiply
    by the Jacobian, so that the integral of ``fm`` equals the integral of
    the result over the new variables y."""
    try:
        rule, jac = _RULES[map_id]
    except KeyError:
        raise ValueError(f"unknown map {map_id!r}") from None
    out = jac(n)
    for (kind, k), e in fm.items():
        out = out * rule(kind, k, n) ** e
    return out
