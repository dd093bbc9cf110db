"""The transformation groups of the L family and of the lattice E.

Builds each group by closure from its generator matrices, prints the order
and the element-order spectrum, and identifies it with a small abstract
permutation group.  At n = 3 on E it also checks the relation between
phi (sigma phi psi phi)^2 and psi sigma.
"""
from rvlab import groups as gr
from rvlab import isomorphism as iso

CASES = [("L", 3, "V2_SEMI"), ("L", 4, "V2_SEMI"), ("E", 2, "S5"),
         ("E", 3, "H_S5"), ("E", 4, "S3S3_SEMI"), ("E", 5, "S3S3_SEMI")]

for family, n, model in CASES:
    G = gr.group_L(n) if family == "L" else gr.group_E(n)
    res = iso.identify_group(G, model)
    spec = res.target_profile["order_spectrum"]
    print(f"{family}{n}: order {G.order:5d}  spectrum {spec}  ~ {model}: {res.status}"
          f" ({res.elapsed:.2f} s)")

E3 = gr.group_E(3)
t = gr.theta_matrix(E3)
print("\ntheta^2 == psi sigma on E (n = 3):", gr.theta_relation_check(E3))
print("order of theta:", gr.element_order(t))
