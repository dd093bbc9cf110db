"""Beukers' and Sorokin's integrals for zeta(3) agree.

The index map sends Beukers' exponent vector (a J-family vector at n = 3)
to Sorokin's (a K-family vector).  We evaluate B(N) by randomized QMC on the
J integrand and S(N) by exact shell summation of the K series, and compare
both with Apery's closed form 2 (a_N zeta(3) - b_N).
"""
from fractions import Fraction

import mpmath

from rvlab import exponents as ex
from rvlab import quadrature as qd
from rvlab import series_eval as se

# Apery's numbers a_N, b_N for N = 0, 1, 2
APERY = [(1, Fraction(0)), (5, Fraction(6)), (73, Fraction(351, 4))]

# 30 digits: a_N zeta(3) - b_N cancels almost all leading digits
mpmath.mp.dps = 30
zeta3 = mpmath.zeta(3)
print(f"{'N':>2}  {'QMC of B(N)':>22}  {'series S(N)':>22}  {'Apery':>22}")
for N, (a, b) in enumerate(APERY):
    p = ex.beukers(N)
    P = ex.theorem1_map(p)
    assert P == ex.sorokin(N)
    est = qd.estimate_family_value("J", p)
    enc = se.k_series_value(P, rel_tol=1e-12)
    ref = float(2 * (a * zeta3 - mpmath.mpf(b.numerator) / b.denominator))
    print(f"{N:>2}  {est.mean:.12e} +- {est.stderr:.0e}  {enc.midpoint:.15e}  {ref:.15e}")

# The series keeps an exact rational partial sum; the tail is estimated.
enc = se.k_series_value(ex.sorokin(1))
print("\nS(1) enclosure:", {k: v for k, v in enc.to_dict().items() if k != "rational"})
