"""Vasilyev's integral at N = 0 as a nested sum.

The n-fold integral with denominator delta_n is evaluated through its K form
and compared with the non-strict nested sums (2, .., 2, 1) for odd n and
(2, .., 2) for even n, and with zeta(n) and the alternating eta(n).
"""
from rvlab import exponents as ex
from rvlab import series_eval as se

print(f"{'n':>2}  {'integral':>18}  {'nested sum':>18}  {'/zeta(n)':>10}  {'/eta(n)':>10}")
for n in (2, 3, 4, 5):
    enc = se.k_series_value(ex.vasilyev_K(n, 0), rel_tol=1e-10)
    spec = se.mzv_sum_spec_for_vasilyev(n)
    total = se.mzv_sum_eval(spec)
    print(f"{n:>2}  {enc.midpoint:18.14f}  {total:18.14f}  "
          f"{enc.midpoint / se.zeta_ref(n):10.6f}  {enc.midpoint / se.eta_ref(n):10.6f}"
          f"   {spec.render()}")
