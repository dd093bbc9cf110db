"""Exponent vectors for the J, K and L integral families.

A vector ``p = (a_1..a_n, b_1..b_n, c_2..c_n)`` lives in ``Z^(3n-1)``.  The
flat layout used everywhere (matrices, linear forms) is::

    [a_1, ..., a_n, b_1, ..., b_n, c_2, ..., c_n]

The conventions ``a_0 = 0`` and ``c_1 = 1`` are only applied inside the
predicates below; they are never stored.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
import sympy


def dim(n: int) -> int:
    return 3 * n - 1


def ia(n: int, k: int) -> int:
    """Flat index of a_k (1-based k)."""
    return k - 1


def ib(n: int, k: int) -> int:
    return n + k - 1


def ic(n: int, k: int) -> int:
    """Flat index of c_k, 2 <= k <= n."""
    return 2 * n + k - 2


def _check_lengths(n, a, b, c, names=("a", "b", "c")):
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if len(a) != n or len(b) != n or len(c) != n - 1:
        raise ValueError(
            f"length mismatch for n={n}: len({names[0]})={len(a)}, "
            f"len({names[1]})={len(b)}, len({names[2]})={len(c)} "
            f"(expected {n}, {n}, {n - 1})"
        )


@dataclass(frozen=True)
class ExponentVector:
    """Exponents (a, b, c) of a J or L integral; ``c`` holds c_2..c_n."""

    n: int
    a: tuple[int, ...]
    b: tuple[int, ...]
    c: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(v) for v in self.a))
        object.__setattr__(self, "b", tuple(int(v) for v in self.b))
        object.__setattr__(self, "c", tuple(int(v) for v in self.c))
        _check_lengths(self.n, self.a, self.b, self.c)

    # 1-based accessors; A(0) = 0 and C(1) = 1 by convention
    def A(self, k: int) -> int:
        return 0 if k == 0 else self.a[k - 1]

    def B(self, k: int) -> int:
        return self.b[k - 1]

    def C(self, k: int) -> int:
        return 1 if k == 1 else self.c[k - 2]

    def flat(self) -> tuple[int, ...]:
        return self.a + self.b + self.c

    @classmethod
    def from_flat(cls, n: int, values: Sequence[int]) -> "ExponentVector":
        values = [int(v) for v in values]
        if len(values) != dim(n):
            raise ValueError(f"expected {dim(n)} entries for n={n}, got {len(values)}")
        return cls(n, values[:n], values[n:2 * n], values[2 * n:])

    def to_dict(self) -> dict:
        return {"n": self.n, "a": list(self.a), "b": list(self.b), "c": list(self.c)}

    @classmethod
    def from_dict(cls, d: dict) -> "ExponentVector":
        missing = {"n", "a", "b", "c"} - set(d)
        if missing:
            raise ValueError(f"missing keys {sorted(missing)}")
        return cls(int(d["n"]), d["a"], d["b"], d["c"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ExponentVector":
        return cls.from_dict(json.loads(text))

    def __str__(self):
        return f"a={self.a} b={self.b} c={self.c}"


@dataclass(frozen=True)
class ExponentVectorK:
    """Exponents (A, B, C) of a K integral; ``C`` holds C_2..C_n."""

    n: int
    A: tuple[int, ...]
    B: tuple[int, ...]
    C: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(int(v) for v in self.A))
        object.__setattr__(self, "B", tuple(int(v) for v in self.B))
        object.__setattr__(self, "C", tuple(int(v) for v in self.C))
        _check_lengths(self.n, self.A, self.B, self.C, names=("A", "B", "C"))

    def flat(self) -> tuple[int, ...]:
        return self.A + self.B + self.C

    @classmethod
    def from_flat(cls, n: int, values: Sequence[int]) -> "ExponentVectorK":
        values = [int(v) for v in values]
        if len(values) != dim(n):
            raise ValueError(f"expected {dim(n)} entries for n={n}, got {len(values)}")
        return cls(n, values[:n], values[n:2 * n], values[2 * n:])

    def to_dict(self) -> dict:
        return {"n": self.n, "A": list(self.A), "B": list(self.B), "C": list(self.C)}

    @classmethod
    def from_dict(cls, d: dict) -> "ExponentVectorK":
        missing = {"n", "A", "B", "C"} - set(d)
        if missing:
            raise ValueError(f"missing keys {sorted(missing)}")
        return cls(int(d["n"]), d["A"], d["B"], d["C"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ExponentVectorK":
        return cls.from_dict(json.loads(text))

    def __str__(self):
        return f"A={self.A} B={self.B} C={self.C}"


def parse_vector(d: dict):
    """Return an ExponentVector or ExponentVectorK depending on the keys."""
    if "A" in d:
        return ExponentVectorK.from_dict(d)
    return ExponentVector.from_dict(d)


# Named vectors --------------------------------------------------------------

def beukers(N: int) -> ExponentVector:
    """Exponents of B(N) as a J (or L) integral at n = 3."""
    return ExponentVector(3, (N, N, N), (N, N, N), (0, N))


def sorokin(N: int) -> ExponentVectorK:
    """Exponents of S(N) as a K integral at n = 3."""
    return ExponentVectorK(3, (N, N, N), (N, N, N), (N, N))


def vasilyev(n: int, N: int) -> ExponentVector:
    """Vasilyev's integral: all a_k = b_k = N, denominator delta_n^(N+1)."""
    return ExponentVector(n, (N,) * n, (N,) * n, (0,) * (n - 2) + (N,))


def vasilyev_J(n: int, N: int) -> ExponentVector:
    """Vasilyev's integral as a J vector: c_k = +-1 below n cancel the
    parity factors of J (D_n = delta_n)."""
    c = []
    for k in range(2, n):
        c.append(1 if k % 2 == 0 and k <= n - 2 else (-1 if k % 2 == 1 else 0))
    return ExponentVector(n, (N,) * n, (N,) * n, c + [N])


def vasilyev_K(n: int, N: int) -> ExponentVectorK:
    """The K-form of Vasilyev's integral: (1 - y_1..y_k)^(N+1) for even k,
    plus k = n when n is odd; every other prefix factor has C_k = -1."""
    C = []
    for k in range(2, n + 1):
        C.append(N if (k % 2 == 0 or k == n) else -1)
    return ExponentVectorK(n, (N,) * n, (N,) * n, C)


# Finiteness -----------------------------------------------------------------

def k_budget(P: ExponentVectorK) -> int:
    """sum_{k>=2} (C_k - B_k)^+, which must not exceed B_1."""
    return sum(max(P.C[k - 2] - P.B[k - 1], 0) for k in range(2, P.n + 1))


def is_finite_K(P: ExponentVectorK) -> bool:
    if any(v < 0 for v in P.A) or any(v < 0 for v in P.B):
        return False
    return k_budget(P) <= P.B[0]


def rho_profile(p: ExponentVector) -> tuple[int, ...]:
    """The values rho_1..rho_n of the L-finiteness recursion."""
    n = p.n
    rho = [0] * (n + 1)
    rho[n] = p.C(n) - p.B(n)
    rho[n - 1] = p.C(n - 1) - 1 - p.B(n - 1)
    for k in range(n - 2, 0, -1):
        rho[k] = max(rho[k + 2], 0) + p.C(k) - 1 - p.B(k)
    return tuple(rho[1:])


def is_finite_L(p: ExponentVector) -> tuple[bool, tuple[int, ...]]:
    rho = rho_profile(p)
    if any(v < 0 for v in p.a) or any(v < 0 for v in p.b):
        return False, rho
    ok = all(rho[k - 1] <= p.A(k - 1) for k in range(1, p.n + 1))
    return ok, rho


# Index map between J and K --------------------------------------------------

def theorem1_map(p: ExponentVector) -> ExponentVectorK:
    """Exponents P such that J(p) = K(P)."""
    n = p.n

    def tail(k):
        return sum(p.C(j) for j in range(k, n + 1))

    A = [p.A(n + 1 - k) for k in range(1, n + 1)]
    B = [p.A(n - 1) + p.B(n) - tail(2)] + [p.B(n + 1 - k) for k in range(2, n + 1)]
    C = []
    for k in range(2, n + 1):
        if k % 2 == 0:
            C.append(p.A(n + 1 - k) + p.B(n + 1 - k) - tail(k))
        else:
            C.append(tail(k) - p.A(n - k))
    return ExponentVectorK(n, A, B, C)


def linear_matrix(fn, n: int) -> np.ndarray:
    """Integer matrix of a linear map on flat vectors, read off unit vectors."""
    d = dim(n)
    cols = []
    for i in range(d):
        e = [0] * d
        e[i] = 1
        cols.append(fn(e))
    return np.array(cols, dtype=np.int64).T


@lru_cache(maxsize=None)
def theorem1_matrix(n: int) -> np.ndarray:
    m = linear_matrix(
        lambda e: theorem1_map(ExponentVector.from_flat(n, e)).flat(), n)
    m.setflags(write=False)
    return m


@lru_cache(maxsize=None)
def theorem1_inverse_matrix(n: int) -> np.ndarray:
    M = sympy.Matrix(theorem1_matrix(n).tolist())
    inv = M.inv()
    if any(not v.is_integer for v in inv):
        raise ArithmeticError(f"index map for n={n} has a non-integral inverse")
    out = np.array(inv.tolist(), dtype=np.int64)
    out.setflags(write=False)
    return out


def theorem1_inverse(P: ExponentVectorK) -> ExponentVector:
    flat = theorem1_inverse_matrix(P.n) @ np.array(P.flat(), dtype=object)
    return ExponentVector.from_flat(P.n, [int(v) for v in flat])


def is_finite_J(p: ExponentVector) -> bool:
    """Derived criterion: J(p) is finite iff its K image is."""
    return is_finite_K(theorem1_map(p))


# The sublattice E ------------------------------------------------------------

def e_constraints(n: int) -> np.ndarray:
    """Rows r with r . p = 0 exactly for p in E."""
    d = dim(n)
    rows = []

    def row(**coeffs):
        r = [0] * d
        for key, v in coeffs.items():
            r[key_index(n, key)] += v
        return r

    for k in range(2, n):
        rows.append(row(**{f"c{k}": 1}))
    if n == 3:
        rows.append(row(a1=1, b2=1, a3=-1, b3=-1))
    elif n >= 4:
        rows.append(row(a2=1, b1=-1))
        rows.append(row(**{f"b{n}": 1, f"c{n}": -1}))
        for k in range(1, n - 1):
            r = [0] * d
            r[ia(n, k)] += 1
            r[ib(n, k + 1)] += 1
            r[ia(n, k + 2)] -= 1
            r[ib(n, k + 2)] -= 1
            rows.append(r)
    return np.array(rows, dtype=np.int64).reshape(len(rows), d)


def key_index(n: int, key: str) -> int:
    kind, k = key[0], int(key[1:])
    return {"a": ia, "b": ib, "c": ic}[kind](n, k)


def is_in_E(p: ExponentVector) -> bool:
    cons = e_constraints(p.n)
    if cons.size == 0:
        return True
    return not np.any(cons @ np.array(p.flat(), dtype=np.int64))


@lru_cache(maxsize=None)
def _e_basis_data(n: int):
    cons = e_constraints(n)
    d = dim(n)
    if cons.shape[0] == 0:
        return np.eye(d, dtype=np.int64), tuple(range(d))
    R, pivots = sympy.Matrix(cons.tolist()).rref()
    free = [j for j in range(d) if j not in pivots]
    basis = []
    for f in free:
        v = [sympy.Integer(0)] * d
        v[f] = sympy.Integer(1)
        for i, pc in enumerate(pivots):
            v[pc] = -R[i, f]
        if any(not x.is_integer for x in v):
            raise ArithmeticError(f"E for n={n} has no unit-pivot parametrization")
        basis.append([int(x) for x in v])
    B = np.array(basis, dtype=np.int64).T
    B.setflags(write=False)
    return B, tuple(free)


def E_basis(n: int) -> list[ExponentVector]:
    """Integer basis of E; column j of ``E_basis_matrix(n)`` as vectors."""
    B, _ = _e_basis_data(n)
    return [ExponentVector.from_flat(n, B[:, j]) for j in range(B.shape[1])]


def E_basis_matrix(n: int) -> np.ndarray:
    return _e_basis_data(n)[0]


def E_free_coordinates(n: int) -> tuple[int, ...]:
    """Flat indices whose values are the E-coordinates of a vector in E."""
    return _e_basis_data(n)[1]


def to_E_coords(p: ExponentVector) -> tuple[int, ...]:
    if not is_in_E(p):
        raise ValueError(f"{p} is not in E")
    flat = p.flat()
    return tuple(flat[j] for j in E_free_coordinates(p.n))


def from_E_coords(n: int, coords: Sequence[int]) -> ExponentVector:
    B = E_basis_matrix(n)
    flat = B.astype(object) @ np.array([int(v) for v in coords], dtype=object)
    return ExponentVector.from_flat(n, flat)
