"""Orbits of an exponent vector and the factorial invariant.

For p in E, every group element g gives L(p) = cof(g, p) L(g p) with an
explicit rational cofactor.  Dividing L(p) by a product of factorials Phi(p)
gives a quantity constant on the orbit; we check that exactly.
"""
import json
from pathlib import Path

import numpy as np

from rvlab import exponents as ex
from rvlab import groups as gr
from rvlab import quadrature as qd

params = Path(__file__).parent / "params"

p = ex.parse_vector(json.loads((params / "e_orbit_n2.json").read_text()))
G = gr.group_E(2)
rows = gr.orbit(G, p.flat())
print(f"orbit of {p} under the n = 2 group: {len(rows)} vectors")
for row in rows[:6]:
    print(f"  {'.'.join(row.word) or 'e':<24} {row.vector}  L(p)/L(gp) = {row.cofactor}")

# check one cofactor numerically
row = rows[3]
x = qd.estimate_family_value("L", p)
y = qd.estimate_family_value("L", ex.ExponentVector.from_flat(2, row.vector))
r, err = qd.ratio_with_error(x, y)
print(f"\nQMC ratio {r:.6f} +- {err:.1e} against cofactor {float(row.cofactor):.6f}")

# invariant quotient at n = 4: cof(g, p) Phi(g p) = Phi(p) for all 72 elements
q = ex.parse_vector(json.loads((params / "e_orbit_n4.json").read_text()))
G4 = gr.group_E(4)
ok = all(gr.invariant_check(G4, el, q.flat()) for el in G4.elements)
print(f"\nPhi invariant on the orbit of {q}: {ok}")
print("orbit size:", len(gr.orbit(G4, q.flat())))
