"""Von Neumann entropy bound from a Gauss-Radau sum of node programs.

Each node t_i of the quadrature contributes c_i (1 + v_i), where v_i is the
verified lower bound of one moment-matrix program.  Expect a few minutes on
one core.

Run: python demos/04_von_neumann_bound.py
"""
from __future__ import annotations

from dicert.certify import CertificationTask, bell_geq, certify, gauss_radau
from dicert.qmodel import make_bell

e = make_bell("IDelta", 0.52)
value = 5.179
q = gauss_radau(6)
print("nodes  ", " ".join(f"{t:.4f}" for t in q.nodes))
print("weights", " ".join(f"{w:.4f}" for w in q.weights))

hmin = certify(CertificationTask(bell_geq(e, value))).entropy_bits
res = certify(CertificationTask(bell_geq(e, value), method="vonneumann", nodes=6))
for t, v, c, d in zip(q.nodes, res.node_values, res.node_contributions, res.diagnostics):
    print(f"t = {t:.4f}  v = {v:+.4f}  contribution {c:.4f}  ({d['status']})")
print(f"H_min {hmin:.3f} bits, von Neumann bound {res.entropy_bits:.3f} bits")
