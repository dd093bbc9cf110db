"""Deriving generators for the K family.

The y' change of variables is pushed through the generic K integrand
symbolically; the result is again K-shaped, so it induces an integer matrix
on exponent vectors.  Each candidate is accepted only after the ratio
K(P) / K(g P) matches its cofactor on random vectors.  A deliberately wrong
candidate is rejected by the same test.
"""
import numpy as np

from rvlab import exponents as ex
from rvlab import groups as gr
from rvlab import integrands as it

n = 3
fm = it.fm_from_K(ex.sorokin(0))
out = it.pushforward_exponent_map(fm, it.YPRIME, n)
print("S(0) integrand:       ", fm.render())
print("after y' substitution:", out.render())
print("as a K vector:        ", it.K_from_fm(out, n))

rng = np.random.default_rng(0)
for gen in gr.k_candidates(n):
    checks = [gr.k_ratio_check(gen, n, gr.random_finite_K(n, rng, gen)) for _ in range(10)]
    worst = max(abs(c.ratio - float(c.cofactor)) / c.error for c in checks)
    print(f"{gen.name:<11} involution={gr.is_involution(gen.matrix)}  "
          f"all ok={all(c.ok for c in checks)}  worst |r - cof| / err = {worst:.2f}")

m = np.eye(ex.dim(n), dtype=np.int64)
m[[0, n]] = m[[n, 0]]
fake = gr.Generator("SWAP_A1_B1", m, m)
checks = [gr.k_ratio_check(fake, n, gr.random_finite_K(n, rng, fake)) for _ in range(10)]
print(f"{fake.name:<11} all ok={all(c.ok for c in checks)}")

G = gr.group_K(n)
print("\nK-family group order:", G.order, " spectrum:", gr.order_spectrum(G))
