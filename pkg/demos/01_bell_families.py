"""Bell families at a glance: classical and quantum bounds, HWP angles, NPA check.

Run: python demos/01_bell_families.py
"""
from __future__ import annotations

import math

from dicert import tables
from dicert.certify import max_bell_value
from dicert.qmodel import bell_value, classical_bound, ideal_correlators, make_bell, tsirelson_bound

cases = [("ModCHSH", None), ("IDelta", 0.52), ("IDelta", 0.3), ("JGamma", 0.0), ("JGamma", math.pi / 12)]

print(f"{'expression':<20}{'classical':>10}{'quantum':>10}{'NPA lvl 2':>11}{'HWP ideal':>11}")
for family, p in cases:
    e = make_bell(family, p)
    angles = tables.angles_for(family, p) if p is not None else None
    ideal = bell_value(ideal_correlators(*angles), e) if angles else float("nan")
    print(f"{str(e):<20}{classical_bound(e):>10.4f}{tsirelson_bound(e):>10.4f}"
          f"{max_bell_value(e):>11.5f}{ideal:>11.4f}")

# the gap between classical and quantum bounds is what a violation has to beat
e = make_bell("IDelta", 0.52)
print(f"\nI_delta(0.52): quantum/classical = {tsirelson_bound(e) / classical_bound(e):.4f}")
