"""Bundled reference tables and the row-by-row comparisons built on them.

Numbers in the fixture are kept as strings where their printed precision
matters: the tolerance of a closed-form comparison and the choice of Bell
threshold both depend on how many decimals were given.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable, Iterable

from .qmodel import BellExpression, classical_bound, ideal_correlators, bell_value, make_bell, tsirelson_bound

__all__ = [
    "parse_parameter",
    "decimals",
    "rounding_tolerance",
    "reference_tables",
    "tabulated_angles",
    "bell_threshold",
    "Row",
    "TableReport",
    "TABLE_NAMES",
]

FAMILY_ALIASES = {
    "i": "IDelta",
    "idelta": "IDelta",
    "delta": "IDelta",
    "j": "JGamma",
    "jgamma": "JGamma",
    "gamma": "JGamma",
    "modchsh": "ModCHSH",
    "chsh": "ModCHSH",
}

_PI_RE = re.compile(r"^\s*([-+]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$", re.IGNORECASE)


def canonical_family(name: str) -> str:
    try:
        return FAMILY_ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown Bell family {name!r}; use I, J or modCHSH") from None


def parse_parameter(text: str | float) -> float:
    """Float or pi-fraction literal such as ``pi/24`` or ``2pi/3``."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _PI_RE.match(text)
    if m:
        coef = m.group(1)
        coef = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
        den = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"cannot parse parameter {text!r}") from None


def decimals(text: str) -> int:
    text = text.strip().replace(",", ".")
    return len(text.split(".")[1]) if "." in text else 0


def rounding_tolerance(text: str) -> float:
    """Tolerance for a printed bound: 0.005 for three decimals, 0.05 otherwise."""
    return 0.005 if decimals(text) >= 3 else 0.05


def _number(text: str) -> float:
    return float(str(text).replace(",", "."))


@lru_cache(maxsize=None)
def _load_json() -> str:
    return resources.files("dicert.data").joinpath("reference_tables.json").read_text()


def reference_tables() -> dict:
    return json.loads(_load_json())["experiments"]


def tabulated_angles() -> dict[tuple[str, str], tuple[list[float], list[float]]]:
    """``{(family, parameter text): (alice angles, bob angles)}`` in degrees."""
    text = resources.files("dicert.data").joinpath("angles.csv").read_text()
    out: dict[tuple[str, str], tuple[list[float], list[float]]] = {}
    for row in csv.DictReader(text.splitlines()):
        key = (row["family"], row["parameter"])
        alice, bob = out.setdefault(key, ([0.0, 0.0], [0.0, 0.0]))
        (alice if row["role"] == "A" else bob)[int(row["setting"])] = float(row["theta_degrees"])
    return out


def angles_for(family: str, parameter: float) -> tuple[list[float], list[float]] | None:
    for (fam, ptext), angles in tabulated_angles().items():
        if fam == family and abs(parse_parameter(ptext) - parameter) < 1e-9:
            return angles
    return None


def bell_threshold(row: dict, e: BellExpression) -> float:
    """Observed Bell value, taken from whichever printed figure is more precise.

    The experimental value carries half a unit of its last decimal; the
    relative value carries 5e-4 times the quantum bound.
    """
    exp_text = str(row["experimental"])
    exp_err = 0.5 * 10.0 ** -decimals(exp_text)
    q = tsirelson_bound(e)
    rel_err = 0.0005 * q
    if exp_err <= rel_err:
        return _number(exp_text)
    return float(row["relative"]) * q


@dataclass
class Row:
    label: str
    reference: float
    computed: float
    tolerance: float
    note: str = ""

    @property
    def delta(self) -> float:
        return abs(self.computed - self.reference)

    @property
    def passed(self) -> bool:
        return math.isfinite(self.computed) and self.delta <= self.tolerance

    def to_json(self) -> dict:
        return {"label": self.label, "reference": self.reference, "computed": self.computed,
                "delta": self.delta, "tolerance": self.tolerance, "pass": self.passed, "note": self.note}


@dataclass
class TableReport:
    name: str
    rows: list[Row] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_json(self) -> dict:
        return {"table": self.name, "pass": self.passed, "rows": [r.to_json() for r in self.rows]}

    def format(self) -> str:
        lines = [f"== {self.name} ==", f"{'row':<28}{'reference':>11}{'computed':>11}{'|delta|':>10}{'tol':>8}  result"]
        for r in self.rows:
            lines.append(f"{r.label:<28}{r.reference:>11.4f}{r.computed:>11.4f}{r.delta:>10.4f}{r.tolerance:>8.3f}  "
                         f"{'pass' if r.passed else 'FAIL'}{('  ' + r.note) if r.note else ''}")
        return "\n".join(lines)


def _expression(exp: dict, row: dict) -> BellExpression:
    return make_bell(exp["family"], parse_parameter(row["parameter"]))


def violation_table(key: str) -> TableReport:
    exp = reference_tables()[key]
    report = TableReport(f"violation-{key}")
    for row in exp["rows"]:
        e = _expression(exp, row)
        tag = f"{exp['family']}({row['parameter']})"
        report.rows.append(Row(f"{tag} classical", _number(row["classical"]), classical_bound(e),
                               rounding_tolerance(row["classical"])))
        report.rows.append(Row(f"{tag} quantum", _number(row["quantum"]), tsirelson_bound(e),
                               rounding_tolerance(row["quantum"])))
    return report


def angles_table() -> TableReport:
    report = TableReport("angles")
    for (family, ptext), (alice, bob) in tabulated_angles().items():
        e = make_bell(family, parse_parameter(ptext))
        value = bell_value(ideal_correlators(alice, bob), e)
        report.rows.append(Row(f"{family}({ptext}) ideal", tsirelson_bound(e), value, 5e-3))
    return report


def entropy_table(key: str, column: str, compute: Callable[[BellExpression, float, dict], float],
                  tolerance: float) -> TableReport:
    exp = reference_tables()[key]
    report = TableReport(f"entropy-{key}-{column}")
    for row in exp["rows"]:
        if column not in row:
            continue
        e = _expression(exp, row)
        threshold = bell_threshold(row, e)
        value = compute(e, threshold, row)
        report.rows.append(Row(f"{exp['family']}({row['parameter']}) {column}", float(row[column]), value,
                               tolerance, note=f"Bell >= {threshold:.4f}"))
    return report


def rates_table(bits: Callable[[str, dict], dict[str, float]] | None = None) -> TableReport:
    """Bits per second from the tabulated entropies at the stated event rates.

    ``bits(key, row)`` may supply computed entropies instead; by default the
    tabulated ones (best von Neumann column, min-entropy) are used.
    """
    report = TableReport("rates")
    for key, exp in reference_tables().items():
        row = next(r for r in exp["rows"] if r["parameter"] == exp["rate_parameter"])
        values = bits(key, row) if bits else {"vonneumann": float(row["cor8"]), "minentropy": float(row["hmin"])}
        for kind, stated in exp["rate_bits_per_second"].items():
            computed = values[kind] * exp["events_per_second"]
            # stated figures are rounded to 10 (von Neumann) or 1 bit/s; allow that plus 1 bit/s
            tol = (5.0 if stated % 10 == 0 else 0.5) + 1.0
            report.rows.append(Row(f"{key} {kind} @{exp['events_per_second']}/s", float(stated), computed, tol))
    return report


TABLE_NAMES = (
    "violation-I-lowrate",
    "violation-J",
    "violation-I-highrate",
    "angles",
    "entropy-I-lowrate",
    "entropy-J",
    "entropy-I-highrate",
    "rates",
)


def iter_keys(names: Iterable[str]) -> list[str]:
    out = []
    for name in names:
        if name == "all":
            out.extend(TABLE_NAMES)
        elif name in TABLE_NAMES:
            out.append(name)
        else:
            raise ValueError(f"unknown table {name!r}; choose from {', '.join(TABLE_NAMES)} or all")
    return out
