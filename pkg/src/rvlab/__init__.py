"""Exponent vectors, integral families and their transformation groups.

Modules
-------
exponents     exponent vectors, finiteness criteria, the J -> K index map, the lattice E
integrands    pointwise integrands, changes of variables, symbolic factor rewriting
series_eval   exact shell summation of K, nested sums, reference constants
quadrature    randomized QMC over the unit cube, adaptive 1-D Gauss-Kronrod
groups        generator matrices, cofactors, closure, orbits, invariant quotients
isomorphism   permutation models and isomorphism search
checks        named verification checks used by the CLI and the tests
"""
from .exponents import ExponentVector, ExponentVectorK

__all__ = ["ExponentVector", "ExponentVectorK"]
