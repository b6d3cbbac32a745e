"""Certified min-entropy as a function of the observed Bell value.

At the classical bound nothing is certified; at the quantum bound of I_delta
the outcome pair is uniformly random to the adversary, giving two bits.

Run: python demos/02_min_entropy_curve.py
"""
from __future__ import annotations

import numpy as np

from dicert.certify import CertificationTask, bell_geq, min_entropy
from dicert.qmodel import classical_bound, make_bell, tsirelson_bound

e = make_bell("IDelta", 0.52)
lo, hi = classical_bound(e), tsirelson_bound(e)
print(f"I_delta(0.52): classical {lo:.4f}, quantum {hi:.4f}")
print(f"{'Bell value':>12}{'H_min bits':>12}")
for value in np.linspace(lo, hi, 9):
    res = min_entropy(CertificationTask(bell_geq(e, value)))
    print(f"{value:>12.4f}{res.entropy_bits:>12.4f}")
