"""Isomorphism tests between the matrix groups and small abstract models.

Everything is done in permutation form.  A matrix group is turned into a
permutation group by letting it act on the union of the orbits of the
standard basis vectors, which is faithful.  Elements are numpy index arrays
and ``compose(p, q) = p[q]`` means "apply q, then p", matching the matrix
convention of ``groups``.
"""
from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .groups import Group


class SearchTimeout(RuntimeError):
    pass


class PermGroup:
    """A finite permutation group with all elements enumerated."""

    def __init__(self, gens, base=None, name=""):
        gens = [np.asarray(g, dtype=np.int32) for g in gens]
        self.degree = len(gens[0])
        self.base = np.arange(self.degree) if base is None else np.asarray(base)
        self.name = name
        ident = np.arange(self.degree, dtype=np.int32)
        elems = [ident]
        index = {self._key(ident): 0}
        queue = deque([ident])
        while queue:
            g = queue.popleft()
            for s in gens:
                h = g[s]
                k = self._key(h)
                if k not in index:
                    index[k] = len(elems)
                    elems.append(h)
                    queue.append(h)
        self.elements = np.array(elems)
        self.index = index
        self.gen_ids = [index[self._key(s)] for s in gens]
        self._right = {}
        self._orders = None

    def _key(self, p) -> bytes:
        return p[self.base].tobytes()

    @property
    def order(self) -> int:
        return len(self.elements)

    def find(self, p) -> int:
        return self.index[self._key(np.asarray(p, dtype=np.int32))]

    def mul(self, i: int, j: int) -> int:
        return self.find(self.elements[i][self.elements[j]])

    def inv(self, i: int) -> int:
        p = self.elements[i]
        q = np.empty_like(p)
        q[p] = np.arange(len(p), dtype=p.dtype)
        return self.find(q)

    def right_table(self, j: int) -> np.ndarray:
        """t[i] = index of elements[i] * elements[j]."""
        if j not in self._right:
            prods = self.elements[:, self.elements[j]]
            keys = prods[:, self.base]
            self._right[j] = np.array([self.index[k.tobytes()] for k in keys])
        return self._right[j]

    def element_orders(self) -> np.ndarray:
        if self._orders is None:
            self._orders = np.array([_perm_order(p) for p in self.elements])
        return self._orders

    def spectrum(self) -> dict[int, int]:
        vals, counts = np.unique(self.element_orders(), return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, counts)}

    def center_size(self) -> int:
        E = self.elements
        ok = np.ones(len(E), dtype=bool)
        for g in self.gen_ids:
            s = E[g]
            ok &= np.all(E[:, s] == s[E], axis=1)
        return int(ok.sum())

    def subgroup_closure(self, ids) -> set[int]:
        ids = list(ids)
        seen = {0}
        queue = deque([0])
        while queue:
            x = queue.popleft()
            for s in ids:
                y = self.mul(x, s)
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return seen

    def derived_subgroup(self) -> set[int]:
        gens = self.gen_ids
        comms = {self.mul(self.mul(self.inv(a), self.inv(b)), self.mul(a, b))
                 for a in gens for b in gens}
        H = self.subgroup_closure(comms)
        while True:
            extra = {self.mul(self.mul(self.inv(g), h), g) for g in gens for h in comms}
            extra -= H
            if not extra:
                return H
            comms |= extra
            H = self.subgroup_closure(comms)

    def abelianization_order(self) -> int:
        return self.order // len(self.derived_subgroup())

    def conjugacy_class_reps(self) -> list[int]:
        seen = np.zeros(self.order, dtype=bool)
        reps = []
        invs = [self.inv(g) for g in self.gen_ids]
        for i in range(self.order):
            if seen[i]:
                continue
            reps.append(i)
            seen[i] = True
            queue = [i]
            while queue:
                x = queue.pop()
                for g, gi in zip(self.gen_ids, invs):
                    y = self.mul(self.mul(gi, x), g)
                    if not seen[y]:
                        seen[y] = True
                        queue.append(y)
        return reps

    def invariant_profile(self) -> dict:
        return {
            "order": self.order,
            "order_spectrum": self.spectrum(),
            "center": self.center_size(),
            "abelianization": self.abelianization_order(),
        }


def _perm_order(p) -> int:
    seen = np.zeros(len(p), dtype=bool)
    out = 1
    for i in range(len(p)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        out = math.lcm(out, length)
    return out


def perm_group_from_matrices(group: Group) -> PermGroup:
    """Faithful permutation action on the orbits of the standard basis."""
    gens = [g.matrix for g in group.generators]
    r = gens[0].shape[0]
    points = {}
    order = []
    for i in range(r):
        e = tuple(int(v) for v in np.eye(r, dtype=np.int64)[:, i])
        if e in points:
            continue
        points[e] = len(order)
        order.append(e)
        queue = deque([e])
        while queue:
            v = queue.popleft()
            for m in gens:
                w = tuple(int(x) for x in m @ np.array(v))
                if w not in points:
                    points[w] = len(order)
                    order.append(w)
                    queue.append(w)
    perms = []
    for m in gens:
        perms.append([points[tuple(int(x) for x in m @ np.array(v))] for v in order])
    base = [points[tuple(int(v) for v in np.eye(r, dtype=np.int64)[:, i])] for i in range(r)]
    return PermGroup(perms, base=base, name=f"{group.family}{group.n}")


# Models -----------------------------------------------------------------------------

def _cycle_perm(degree, *cycles):
    p = list(range(degree))
    for cyc in cycles:
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            p[a] = b
    return p


def model_group(name: str) -> PermGroup:
    if name == "V2_SEMI":      # (V x V) x| C2, the swap exchanging the factors
        gens = [_cycle_perm(8, (0, 1), (2, 3)), _cycle_perm(8, (0, 2), (1, 3)),
                _cycle_perm(8, (0, 4), (1, 5), (2, 6), (3, 7))]
    elif name == "S3S3_SEMI":  # (S3 x S3) x| C2
        gens = [_cycle_perm(6, (0, 1)), _cycle_perm(6, (0, 1, 2)),
                _cycle_perm(6, (0, 3), (1, 4), (2, 5))]
    elif name == "H_S5":       # even sign changes x| S5, i.e. signed permutations of 5
        gens = [_cycle_perm(10, (0, 1, 2, 3, 4), (5, 6, 7, 8, 9)),
                _cycle_perm(10, (0, 1), (5, 6)),
                _cycle_perm(10, (0, 5), (1, 6))]
    elif name == "S5":
        gens = [_cycle_perm(5, (0, 1, 2, 3, 4)), _cycle_perm(5, (0, 1))]
    else:
        raise ValueError(f"unknown model {name!r}")
    return PermGroup(gens, name=name)


MODEL_ORDERS = {"V2_SEMI": 32, "S3S3_SEMI": 72, "H_S5": 1920, "S5": 120}


# Search --------------------------------------------------------------------------------

@dataclass
class IsoResult:
    isomorphic: bool | None          # None: invariants agree but search did not finish
    status: str                      # "ISOMORPHIC", "NOT_ISOMORPHIC", "UNPROVEN"
    target_profile: dict
    model_profile: dict
    images: list[int] = field(default_factory=list)
    elapsed: float = 0.0


def _generating_tuple(G: PermGroup, rng) -> list[int]:
    """A short generating tuple of G, preferring elements of large order."""
    orders = G.element_orders()
    for k in range(1, 5):
        best = None
        for _ in range(200):
            ids = [int(i) for i in rng.integers(0, G.order, k)]
            if len(G.subgroup_closure(ids)) == G.order:
                score = sum(int(orders[i]) for i in ids)
                if best is None or score > best[0]:
                    best = (score, ids)
        if best:
            return best[1]
    raise RuntimeError("no small generating tuple found")


def _extend(M: PermGroup, mgens: list[int], G: PermGroup, images: list[int]) -> bool:
    """Try to extend mgens -> images to an isomorphism M -> G."""
    mtables = [M.right_table(g) for g in mgens]
    gtables = [G.right_table(h) for h in images]
    phi = np.full(M.order, -1, dtype=np.int64)
    phi[0] = 0
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for mt, gt in zip(mtables, gtables):
            y, w = mt[x], gt[phi[x]]
            if phi[y] < 0:
                phi[y] = w
                queue.append(y)
            elif phi[y] != w:
                return False
    return len(set(phi.tolist())) == M.order == G.order


def find_isomorphism(G: PermGroup, M: PermGroup, time_budget: float = 60.0,
                     seed: int = 0) -> IsoResult:
    t0 = time.monotonic()
    gp, mp = G.invariant_profile(), M.invariant_profile()
    if gp != mp:
        return IsoResult(False, "NOT_ISOMORPHIC", gp, mp, elapsed=time.monotonic() - t0)
    rng = np.random.default_rng(seed)
    mgens = _generating_tuple(M, rng)
    morders = M.element_orders()
    gorders = G.element_orders()
    # pairwise product orders, used for pruning
    mpair = {(i, j): int(morders[M.mul(mgens[i], mgens[j])])
             for i in range(len(mgens)) for j in range(i + 1, len(mgens))}
    first = [h for h in G.conjugacy_class_reps() if gorders[h] == morders[mgens[0]]]
    rest = [[h for h in range(G.order) if gorders[h] == morders[g]] for g in mgens[1:]]
    for h0 in first:
        for tail in product(*rest):
            if time.monotonic() - t0 > time_budget:
                return IsoResult(None, "UNPROVEN", gp, mp, elapsed=time.monotonic() - t0)
            imgs = [h0, *tail]
            if any(int(gorders[G.mul(imgs[i], imgs[j])]) != o for (i, j), o in mpair.items()):
                continue
            if _extend(M, mgens, G, imgs):
                return IsoResult(True, "ISOMORPHIC", gp, mp, imgs, time.monotonic() - t0)
    return IsoResult(False, "NOT_ISOMORPHIC", gp, mp, elapsed=time.monotonic() - t0)


def identify_group(group: Group, model: str, time_budget: float = 60.0) -> IsoResult:
    return find_isomorphism(perm_group_from_matrices(group), model_group(model), time_budget)
