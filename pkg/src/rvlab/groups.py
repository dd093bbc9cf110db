"""Transformation groups acting on exponent vectors.

Group elements are integer matrices acting on column vectors, ``g . p = M p``.
A word ``(g1, g2, ..., gk)`` denotes ``M_g1 M_g2 ... M_gk``, so its
rightmost letter acts first.  Every generator carries a cofactor with

    I(p) = cofactor_g(p) * I(g . p)

and cofactors compose along words as cof_{gh}(p) = cof_g(h p) cof_h(p).

For the E family the matrices act on E-coordinates (see
``exponents.E_basis``); ``full_matrix`` is the same map written on
Z^(3n-1), which agrees with it on E.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exponents as ex
from .exponents import ExponentVector, ExponentVectorK, dim, ia, ib, ic


class Inadmissible(ValueError):
    """A factorial argument of a cofactor is negative at this vector."""


class CapExceeded(RuntimeError):
    pass


class NotStable(ValueError):
    """A generator does not map E into itself."""


class DerivationIncomplete(RuntimeError):
    pass


# Cofactors --------------------------------------------------------------------

def form(n: int, **coeffs) -> tuple[int, ...]:
    """Integer linear form from keyword coefficients, e.g. form(3, a3=1, b3=1, c3=-1)."""
    v = [0] * dim(n)
    for key, c in coeffs.items():
        v[ex.key_index(n, key)] += c
    return tuple(v)


@dataclass(frozen=True)
class CofactorDescriptor:
    """prod factorial(num . p) / prod factorial(den . p)."""

    numerator_forms: tuple[tuple[int, ...], ...] = ()
    denominator_forms: tuple[tuple[int, ...], ...] = ()

    @property
    def trivial(self) -> bool:
        return not self.numerator_forms and not self.denominator_forms

    def __call__(self, flat: Sequence[int]) -> Fraction:
        num = 1
        den = 1
        for f in self.numerator_forms:
            num *= _fact(f, flat)
        for f in self.denominator_forms:
            den *= _fact(f, flat)
        return Fraction(num, den)


def _fact(f, flat) -> int:
    v = sum(c * x for c, x in zip(f, flat) if c)
    if v < 0:
        raise Inadmissible(f"factorial of negative argument {v}")
    return math.factorial(v)


TRIVIAL = CofactorDescriptor()


def chi_cofactor(n: int) -> CofactorDescriptor:
    return CofactorDescriptor(
        (form(n, **{f"a{n}": 1}), form(n, **{f"b{n}": 1})),
        (form(n, **{f"c{n}": 1}), form(n, **{f"a{n}": 1, f"b{n}": 1, f"c{n}": -1})),
    )


def phi_cofactor(n: int) -> CofactorDescriptor:
    m = n - 1
    return CofactorDescriptor(
        (form(n, **{f"a{m}": 1}), form(n, **{f"b{m}": 1})),
        (form(n, **{f"c{n}": 1}), form(n, **{f"a{m}": 1, f"b{m}": 1, f"c{n}": -1})),
    )


# Generator maps on Z^(3n-1) --------------------------------------------------------

def sigma_map(p: ExponentVector) -> ExponentVector:
    a, b = list(p.a), list(p.b)
    a[0], b[1] = p.b[1], p.a[0]
    a[1], b[0] = p.b[0], p.a[1]
    return ExponentVector(p.n, a, b, p.c)


def psi_map(p: ExponentVector) -> ExponentVector:
    n = p.n
    a = [p.A(n + 1 - k) for k in range(1, n + 1)]
    b = [p.A(n - 1) + p.B(n) - p.C(n)] + [p.B(n + 2 - k) for k in range(2, n + 1)]
    c = [p.A(n + 2 - k) + p.B(n + 2 - k) + p.C(n + 1 - k) - p.B(n + 1 - k) - p.A(n - k)
         for k in range(2, n)]
    c.append(p.A(2) + p.B(2) - p.B(1))
    return ExponentVector(n, a, b, c)


def chi_map(p: ExponentVector) -> ExponentVector:
    n = p.n
    a, b, c = list(p.a), list(p.b), list(p.c)
    a[n - 1], c[n - 2] = p.C(n), p.A(n)
    b[n - 1] = p.A(n) + p.B(n) - p.C(n)
    return ExponentVector(n, a, b, c)


def phi_map(p: ExponentVector) -> ExponentVector:
    n = p.n
    a, b, c = list(p.a), list(p.b), list(p.c)
    a[n - 2], c[n - 2] = p.C(n), p.A(n - 1)
    b[n - 2] = p.A(n - 1) + p.B(n - 1) - p.C(n)
    b[n - 1] = p.A(n - 1) + p.B(n) - p.C(n)
    return ExponentVector(n, a, b, c)


def _matrix_of(fn, n, cls=ExponentVector):
    return ex.linear_matrix(lambda e: fn(cls.from_flat(n, e)).flat(), n)


# K-family candidates

def sigma_k_map(P: ExponentVectorK) -> ExponentVectorK:
    """Swap y_1 and y_2; the K integrand is symmetric in them."""
    A, B = list(P.A), list(P.B)
    A[0], A[1] = A[1], A[0]
    B[0], B[1] = B[1], B[0]
    return ExponentVectorK(P.n, A, B, P.C)


def chi_k_map(P: ExponentVectorK) -> ExponentVectorK:
    """The beta contiguity relation in the last variable y_n, whose only
    denominator is (1 - y_1..y_{n-1} y_n)^(C_n + 1)."""
    n = P.n
    A, B, C = list(P.A), list(P.B), list(P.C)
    A[n - 1], C[n - 2] = P.C[n - 2], P.A[n - 1]
    B[n - 1] = P.A[n - 1] + P.B[n - 1] - P.C[n - 2]
    return ExponentVectorK(n, A, B, C)


def chi_k_cofactor(n: int) -> CofactorDescriptor:
    # same flat positions as chi on (a, b, c)
    return chi_cofactor(n)


def tau_yprime_matrix(n: int) -> np.ndarray:
    """Exponent map induced by the y' change of variables, derived by
    symbolic pushforward of the generic K integrand."""
    from .integrands import YPRIME, K_from_fm, fm_from_K, pushforward_exponent_map

    def image(flat):
        P = ExponentVectorK.from_flat(n, flat)
        return np.array(K_from_fm(pushforward_exponent_map(fm_from_K(P), YPRIME, n), n).flat())

    zero = image([0] * dim(n))
    if np.any(zero):
        raise DerivationIncomplete(f"y' pushforward is affine, offset {zero.tolist()}")
    return np.array([image(e) for e in np.eye(dim(n), dtype=int).tolist()], dtype=np.int64).T


# Generators --------------------------------------------------------------------------

@dataclass(frozen=True)
class Generator:
    name: str
    matrix: np.ndarray          # acting coordinates (E-coordinates for the E family)
    full_matrix: np.ndarray     # on Z^(3n-1)
    cofactor: CofactorDescriptor = TRIVIAL

    def __repr__(self):
        return f"Generator({self.name})"


def _full_generator(name, m, cof=TRIVIAL):
    m = np.asarray(m, dtype=np.int64)
    return Generator(name, m, m, cof)


def make_generators_L(n: int) -> list[Generator]:
    if n < 3:
        raise ValueError("the L-family group needs n >= 3")
    return [
        _full_generator("SIGMA", _matrix_of(sigma_map, n)),
        _full_generator("PSI", _matrix_of(psi_map, n)),
        _full_generator("CHI", _matrix_of(chi_map, n), chi_cofactor(n)),
    ]


def restrict_to_E(m: np.ndarray, n: int) -> np.ndarray:
    """Matrix R with m B = B R for the E basis B; raises NotStable."""
    B = ex.E_basis_matrix(n)
    free = list(ex.E_free_coordinates(n))
    image = m @ B
    R = image[free, :]
    if not np.array_equal(B @ R, image):
        raise NotStable("matrix does not map E into E")
    return R


def make_generators_E(n: int) -> list[Generator]:
    out = []
    for name, fn, cof in (("SIGMA", sigma_map, TRIVIAL), ("PSI", psi_map, TRIVIAL),
                          ("PHI", phi_map, phi_cofactor(n))):
        full = _matrix_of(fn, n)
        try:
            R = restrict_to_E(full, n)
        except NotStable:
            raise NotStable(f"{name} does not stabilize E for n={n}") from None
        out.append(Generator(name, R, full, cof))
    return out


def k_candidates(n: int) -> list[Generator]:
    """Candidate K-family generators before numeric validation."""
    return [
        _full_generator("SIGMA_K", _matrix_of(sigma_k_map, n, ExponentVectorK)),
        _full_generator("CHI_K", _matrix_of(chi_k_map, n, ExponentVectorK), chi_k_cofactor(n)),
        _full_generator("TAU_YPRIME", tau_yprime_matrix(n)),
    ]


@dataclass(frozen=True)
class RatioCheck:
    generator: str
    flat: tuple[int, ...]
    ratio: float        # K(P) / K(g P)
    error: float
    cofactor: Fraction

    @property
    def ok(self) -> bool:
        return abs(self.ratio - float(self.cofactor)) <= 3.0 * self.error


def random_finite_K(n: int, rng, gen: Generator, hi: int = 3, tries: int = 10 ** 4):
    """Random P with entries in 0..hi, g P != P, such that P and g P are
    finite by the K criterion and the cofactor of g is admissible at P."""
    for _ in range(tries):
        flat = [int(v) for v in rng.integers(0, hi + 1, dim(n))]
        image = [int(v) for v in gen.full_matrix @ np.array(flat)]
        if image == flat:
            continue
        if not (ex.is_finite_K(ExponentVectorK.from_flat(n, flat))
                and ex.is_finite_K(ExponentVectorK.from_flat(n, image))):
            continue
        try:
            gen.cofactor(flat)
        except Inadmissible:
            continue
        return flat
    raise RuntimeError("no admissible sample found")


def k_ratio_check(gen: Generator, n: int, flat, method: str = "series", rel_tol: float = 1e-12,
                  points: int = 1 << 16, shifts: int = 16, seed: int = 0) -> RatioCheck:
    """Compare K(P) / K(g P) with the cofactor of g."""
    P = ExponentVectorK.from_flat(n, flat)
    Q = ExponentVectorK.from_flat(n, [int(v) for v in gen.full_matrix @ np.array(flat)])
    if method == "series":
        from .series_eval import k_series_value
        x, y = k_series_value(P, rel_tol=rel_tol), k_series_value(Q, rel_tol=rel_tol)
        r = x.midpoint / y.midpoint
        # relative radii plus a few ulps of rounding in the float tails
        err = abs(r) * (x.radius / abs(x.midpoint) + y.radius / abs(y.midpoint) + 1e-13)
    elif method == "qmc":
        from .quadrature import estimate_family_value, ratio_with_error
        x = estimate_family_value("K", P, points, shifts, seed)
        y = estimate_family_value("K", Q, points, shifts, seed)
        r, err = ratio_with_error(x, y)
    else:
        raise ValueError(f"unknown method {method!r}")
    return RatioCheck(gen.name, tuple(flat), r, err, gen.cofactor(flat))


def make_generators_K(n: int, samples: int = 20, seed: int = 0, method: str = "series",
                      **kw) -> list[Generator]:
    """The K-family candidates that pass the numeric ratio law on
    ``samples`` random finite vectors; raises DerivationIncomplete if any
    candidate fails."""
    if n < 3:
        raise ValueError("the K-family group needs n >= 3")
    rng = np.random.default_rng(seed)
    accepted, rejected = [], []
    for gen in k_candidates(n):
        checks = [k_ratio_check(gen, n, random_finite_K(n, rng, gen), method, **kw)
                  for _ in range(samples)]
        (accepted if all(c.ok for c in checks) else rejected).append(gen)
    if rejected:
        names = ", ".join(g.name for g in rejected)
        raise DerivationIncomplete(f"candidates failed the ratio law: {names}")
    return accepted


def group_K(n: int, cap: int = 10 ** 6, **kw) -> Group:
    return closure(make_generators_K(n, **kw), cap, "K", n)


# Group elements and closure ---------------------------------------------------------

def _key(m: np.ndarray) -> tuple:
    return tuple(m.ravel().tolist())


@dataclass(frozen=True)
class GroupElement:
    matrix: np.ndarray
    word: tuple[str, ...]
    full_matrix: np.ndarray

    @property
    def key(self) -> tuple:
        return _key(self.matrix)

    def __repr__(self):
        return f"GroupElement({'.'.join(self.word) or 'e'})"


@dataclass
class Group:
    family: str
    n: int
    generators: list[Generator]
    elements: list[GroupElement]
    index: dict = field(repr=False, default_factory=dict)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def gens(self) -> dict:
        return {g.name: g for g in self.generators}

    def __contains__(self, m) -> bool:
        return _key(np.asarray(m)) in self.index

    def lookup(self, m) -> GroupElement:
        return self.elements[self.index[_key(np.asarray(m))]]

    def word_matrix(self, word: Sequence[str], full: bool = False) -> np.ndarray:
        gens = self.gens
        size = self.generators[0].full_matrix.shape[0] if full else self.generators[0].matrix.shape[0]
        m = np.eye(size, dtype=np.int64)
        for w in word:
            m = m @ (gens[w].full_matrix if full else gens[w].matrix)
        return m

    def identity(self) -> GroupElement:
        return self.elements[0]


def closure(gens: list[Generator], cap: int = 10 ** 6, family: str = "", n: int = 0) -> Group:
    """Breadth-first enumeration of the group generated by ``gens``; words
    are BFS-shortest."""
    r = gens[0].matrix.shape[0]
    s = gens[0].full_matrix.shape[0]
    e = GroupElement(np.eye(r, dtype=np.int64), (), np.eye(s, dtype=np.int64))
    elements = [e]
    index = {e.key: 0}
    queue = deque([e])
    while queue:
        g = queue.popleft()
        for gen in gens:
            m = g.matrix @ gen.matrix
            k = _key(m)
            if k in index:
                continue
            if len(elements) >= cap:
                raise CapExceeded(f"more than {cap} elements")
            if np.abs(m).max() > 1 << 40:
                raise CapExceeded("matrix entries are growing; the group is infinite")
            h = GroupElement(m, g.word + (gen.name,), g.full_matrix @ gen.full_matrix)
            index[k] = len(elements)
            elements.append(h)
            queue.append(h)
    return Group(family, n, list(gens), elements, index)


def group_L(n: int, cap: int = 10 ** 6) -> Group:
    return closure(make_generators_L(n), cap, "L", n)


def group_E(n: int, cap: int = 10 ** 6) -> Group:
    return closure(make_generators_E(n), cap, "E", n)


# Action, cofactors, invariants ------------------------------------------------------------

def act(group: Group, word: Sequence[str], flat: Sequence[int]) -> tuple[int, ...]:
    """Apply a word to a flat exponent vector, rightmost letter first."""
    gens = group.gens
    v = np.array(flat, dtype=object)
    for w in reversed(word):
        v = gens[w].full_matrix.astype(object) @ v
    return tuple(int(x) for x in v)


def cofactor_eval(group: Group, word: Sequence[str], flat: Sequence[int]) -> Fraction:
    """I(p) / I(w . p) along the word; raises Inadmissible."""
    gens = group.gens
    v = np.array(flat, dtype=object)
    total = Fraction(1)
    for w in reversed(word):
        g = gens[w]
        if not g.cofactor.trivial:
            total *= g.cofactor(v.tolist())
        v = g.full_matrix.astype(object) @ v
    return total


def invariant_forms(n: int) -> list[tuple[int, ...]]:
    """Linear forms whose factorials make L(p) / prod(...) group-invariant on E."""
    if n >= 5:
        return [form(n, **{f"a{n - 1}": 1}), form(n, **{f"b{n - 1}": 1}), form(n, a2=1), form(n, b3=1)]
    if n == 4:
        return [form(n, a3=1), form(n, b3=1), form(n, a2=1)]
    if n == 3:
        return [form(n, a1=1), form(n, a2=1), form(n, a3=1), form(n, b1=1), form(n, b2=1),
                form(n, b3=1), form(n, a2=1, b3=1, c3=-1), form(n, b1=1, b3=1, c3=-1)]
    return [form(n, a1=1), form(n, a2=1), form(n, b1=1), form(n, b2=1), form(n, a1=1, b2=1, c2=-1)]


def invariant_denominator(n: int, flat: Sequence[int]) -> int:
    out = 1
    for f in invariant_forms(n):
        out *= _fact(f, flat)
    return out


def invariant_check(group: Group, element: GroupElement, flat: Sequence[int]) -> bool:
    """cofactor(g, p) * Phi(g p) == Phi(p), exactly."""
    cof = cofactor_eval(group, element.word, flat)
    image = act(group, element.word, flat)
    return cof * invariant_denominator(group.n, image) == invariant_denominator(group.n, flat)


@dataclass(frozen=True)
class OrbitEntry:
    vector: tuple[int, ...]
    word: tuple[str, ...]
    cofactor: Fraction | None   # None when inadmissible along the word


def orbit(group: Group, flat: Sequence[int]) -> list[OrbitEntry]:
    """Distinct images g . p with I(p) / I(g . p)."""
    seen = {}
    for el in group.elements:
        image = act(group, el.word, flat)
        if image in seen:
            continue
        try:
            cof = cofactor_eval(group, el.word, flat)
        except Inadmissible:
            cof = None
        seen[image] = OrbitEntry(image, el.word, cof)
    return list(seen.values())


def orbit_cofactors(group: Group, flat: Sequence[int]) -> dict[tuple, tuple[tuple[int, ...], Fraction]]:
    """For every element g: (g . p, I(p) / I(g . p)), keyed by the matrix key.

    Built by left multiplication from the identity, so each element is
    reached by some word; raises Inadmissible if a factorial argument is
    negative along the way.  Much faster than ``cofactor_eval`` per element.
    """
    p = tuple(int(v) for v in flat)
    e = group.identity()
    out = {e.key: (p, Fraction(1))}
    queue = deque([(e.matrix, p, Fraction(1))])
    while queue:
        m, v, cof = queue.popleft()
        for gen in group.generators:
            m2 = gen.matrix @ m
            k = _key(m2)
            if k in out:
                continue
            c = cof if gen.cofactor.trivial else cof * gen.cofactor(v)
            v2 = tuple(int(x) for x in gen.full_matrix @ np.array(v, dtype=object))
            out[k] = (v2, c)
            queue.append((m2, v2, c))
    return out


def inverse_word(group: Group, word: Sequence[str]) -> tuple[str, ...]:
    """A word for the inverse, using the order of each generator."""
    out = []
    for w in reversed(word):
        k = element_order(group.gens[w].matrix)
        out.extend([w] * (k - 1))
    return tuple(out)


def element_order(m: np.ndarray, limit: int = 10 ** 4) -> int:
    eye = np.eye(m.shape[0], dtype=m.dtype)
    p = m.copy()
    for k in range(1, limit + 1):
        if np.array_equal(p, eye):
            return k
        p = p @ m
    raise CapExceeded(f"element order exceeds {limit}")


def is_involution(m: np.ndarray) -> bool:
    return np.array_equal(m @ m, np.eye(m.shape[0], dtype=m.dtype))


# Theta relation (n = 3, E family) -------------------------------------------------------

def theta_matrix(group: Group) -> np.ndarray:
    """phi (sigma phi psi phi)^2 on E-coordinates."""
    inner = ("SIGMA", "PHI", "PSI", "PHI")
    return group.word_matrix(("PHI",) + inner + inner)


def theta_relation_check(group: Group) -> bool:
    t = theta_matrix(group)
    return np.array_equal(t @ t, group.word_matrix(("PSI", "SIGMA")))


# Reports ------------------------------------------------------------------------------------

def order_spectrum(group: Group) -> dict[int, int]:
    counts: dict[int, int] = {}
    for el in group.elements:
        k = element_order(el.matrix)
        counts[k] = counts.get(k, 0) + 1
    return dict(sorted(counts.items()))


def center_size(group: Group) -> int:
    gms = [g.matrix for g in group.generators]
    return sum(1 for el in group.elements
               if all(np.array_equal(el.matrix @ g, g @ el.matrix) for g in gms))


def group_report(group: Group, isomorphic_to: str | None = None) -> dict:
    return {
        "family": group.family,
        "n": group.n,
        "order": group.order,
        "order_spectrum": {str(k): v for k, v in order_spectrum(group).items()},
        "center": center_size(group),
        "isomorphic_to": isomorphic_to,
        "generators": [
            {"name": g.name, "matrix": g.matrix.tolist(),
             "cofactor": {"num": [list(f) for f in g.cofactor.numerator_forms],
                          "den": [list(f) for f in g.cofactor.denominator_forms]}}
            for g in group.generators
        ],
    }
