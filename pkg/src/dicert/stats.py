"""Coincidence counts: correlator estimates, run aggregation, synthesis, CSV I/O.

Counts for one setting pair are the four coincidence numbers ``n[a, b]``.
A run holds at most one record per setting pair.  Two aggregation modes
are offered:

* ``per-run-stddev``: mean of the per-run correlators, error from the
  spread between runs (sample std divided by sqrt(#runs));
* ``pooled-binomial``: add up all counts and use the binomial error.

The spread of the Bell value between single runs (``run_spread``) is kept
alongside, since that is the magnitude quoted as "standard deviation of
the measurements" for a table of repeated runs.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .qmodel import BehaviorTable, BellExpression, CorrelatorSet

__all__ = [
    "CountsRecord",
    "RunDataset",
    "ExperimentSummary",
    "CountsParseError",
    "estimate_correlator",
    "aggregate_runs",
    "synthesize_counts",
    "synthesize_experiment",
    "load_counts",
    "write_counts",
    "summary_to_correlators",
    "bell_run_values",
    "run_spread",
    "CSV_HEADER",
]

log = logging.getLogger(__name__)

CSV_HEADER = ("run", "x", "y", "n00", "n01", "n10", "n11")
MODES = ("per-run-stddev", "pooled-binomial")


class CountsParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class CountsRecord:
    x: int
    y: int
    n: tuple[int, int, int, int]  # n00, n01, n10, n11

    def __post_init__(self) -> None:
        counts = tuple(int(v) for v in self.n)
        if len(counts) != 4:
            raise ValueError("a record needs exactly four counts")
        if any(v < 0 for v in counts):
            raise ValueError(f"negative count in {counts}")
        object.__setattr__(self, "n", counts)

    @property
    def total(self) -> int:
        return sum(self.n)


@dataclass
class RunDataset:
    records: list[CountsRecord]
    run_id: int | str = 0
    seconds: float | None = None
    window_ns: float | None = None

    def __post_init__(self) -> None:
        seen = set()
        for r in self.records:
            if (r.x, r.y) in seen:
                raise ValueError(f"run {self.run_id}: duplicate record for settings {(r.x, r.y)}")
            seen.add((r.x, r.y))

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return sorted((r.x, r.y) for r in self.records)

    def record(self, x: int, y: int) -> CountsRecord:
        for r in self.records:
            if (r.x, r.y) == (x, y):
                return r
        raise KeyError((x, y))

    @property
    def total_events(self) -> int:
        return sum(r.total for r in self.records)


@dataclass
class ExperimentSummary:
    correlators: dict[tuple[int, int], float]
    stderr: dict[tuple[int, int], float]
    counts: dict[tuple[int, int], int]
    total_events: int
    rate_hz: float | None = None
    mode: str = "per-run-stddev"
    runs: int = 1
    run_correlators: dict[tuple[int, int], np.ndarray] = field(default_factory=dict, repr=False)

    def to_json(self) -> dict:
        pairs = [
            {"x": x, "y": y, "C": self.correlators[(x, y)], "stderr": self.stderr[(x, y)], "N": self.counts[(x, y)]}
            for (x, y) in sorted(self.correlators)
        ]
        return {"pairs": pairs, "total_events": self.total_events, "rate_hz": self.rate_hz}

    @classmethod
    def from_json(cls, data: Mapping | str) -> ExperimentSummary:
        if isinstance(data, str):
            data = json.loads(data)
        cs, es, ns = {}, {}, {}
        for p in data["pairs"]:
            key = (int(p["x"]), int(p["y"]))
            cs[key], es[key], ns[key] = float(p["C"]), float(p["stderr"]), int(p["N"])
        return cls(cs, es, ns, int(data["total_events"]), data.get("rate_hz"))


def estimate_correlator(r: CountsRecord) -> tuple[float, float]:
    """Empirical correlator and its binomial standard error."""
    n = r.total
    if n == 0:
        raise ValueError(f"no events for settings {(r.x, r.y)}")
    n00, n01, n10, n11 = r.n
    c = (n00 + n11 - n01 - n10) / n
    return c, math.sqrt(max(0.0, 1 - c * c) / n)


def aggregate_runs(runs: Sequence[RunDataset], mode: str = "per-run-stddev") -> ExperimentSummary:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if not runs:
        raise ValueError("no runs to aggregate")
    pairs = runs[0].pairs
    for run in runs[1:]:
        if run.pairs != pairs:
            raise ValueError(f"run {run.run_id} covers settings {run.pairs}, expected {pairs}")

    per_run = {k: np.array([estimate_correlator(run.record(*k))[0] for run in runs]) for k in pairs}
    counts = {k: sum(run.record(*k).total for run in runs) for k in pairs}
    if mode == "pooled-binomial":
        cs, es = {}, {}
        for k in pairs:
            pooled = np.sum([run.record(*k).n for run in runs], axis=0)
            cs[k], es[k] = estimate_correlator(CountsRecord(k[0], k[1], tuple(pooled)))
    else:
        cs = {k: float(v.mean()) for k, v in per_run.items()}
        if len(runs) > 1:
            es = {k: float(v.std(ddof=1) / math.sqrt(len(runs))) for k, v in per_run.items()}
        else:
            es = {k: estimate_correlator(runs[0].record(*k))[1] for k in pairs}

    total = sum(run.total_events for run in runs)
    seconds = [run.seconds for run in runs]
    rate = total / sum(seconds) if all(s for s in seconds) else None
    return ExperimentSummary(cs, es, counts, total, rate, mode, len(runs), per_run)


def bell_run_values(summary: ExperimentSummary, e: BellExpression) -> np.ndarray:
    """Bell value of every single run."""
    if not summary.run_correlators:
        raise ValueError("summary carries no per-run correlators")
    return sum(coef * summary.run_correlators[k] for k, coef in e.coeffs.items())


def run_spread(summary: ExperimentSummary, e: BellExpression) -> float:
    """Standard deviation of the Bell value over runs."""
    values = bell_run_values(summary, e)
    return float(values.std(ddof=1)) if len(values) > 1 else 0.0


def synthesize_counts(
    b: BehaviorTable,
    events_per_pair: int | Mapping[tuple[int, int], int],
    seed: int | np.random.Generator,
    run_id: int | str = 0,
    seconds: float | None = None,
) -> RunDataset:
    """Multinomial coincidence counts for every setting pair of ``b``."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    records = []
    for (x, y), p in sorted(b.probs.items()):
        n = events_per_pair[(x, y)] if isinstance(events_per_pair, Mapping) else events_per_pair
        if n < 1:
            raise ValueError("events per pair must be >= 1")
        p = np.clip(p.ravel(), 0, None)
        counts = rng.multinomial(int(n), p / p.sum())
        records.append(CountsRecord(x, y, tuple(int(v) for v in counts)))
    return RunDataset(records, run_id=run_id, seconds=seconds)


def synthesize_experiment(
    b: BehaviorTable, rate_hz: float, seconds_per_run: float, runs: int, seed: int
) -> list[RunDataset]:
    """Repeated runs with the events split evenly between setting pairs."""
    rng = np.random.default_rng(seed)
    per_pair = max(1, int(round(rate_hz * seconds_per_run / len(b.probs))))
    return [synthesize_counts(b, per_pair, rng, run_id=i, seconds=seconds_per_run) for i in range(runs)]


def _parse_int(value: str, name: str, line: int) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise CountsParseError(f"column {name!r} is not an integer: {value!r}", line) from None


def load_counts(path: str | Path | io.TextIOBase) -> list[RunDataset]:
    """Read the ``run,x,y,n00,n01,n10,n11`` CSV format."""
    if isinstance(path, (str, Path)):
        with open(path, newline="") as fh:
            return load_counts(fh)
    reader = csv.reader(path)
    header = next(reader, None)
    if header is None:
        log.warning("counts file is empty")
        return []
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise CountsParseError(f"expected header {','.join(CSV_HEADER)}, got {','.join(header)}", 1)
    runs: dict[str, list[CountsRecord]] = {}
    seen: set[tuple[str, int, int]] = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(CSV_HEADER):
            raise CountsParseError(f"expected {len(CSV_HEADER)} columns, got {len(row)}", lineno)
        run = row[0].strip()
        x, y = (_parse_int(row[i], CSV_HEADER[i], lineno) for i in (1, 2))
        counts = tuple(_parse_int(row[i], CSV_HEADER[i], lineno) for i in range(3, 7))
        if x < 0 or y < 0:
            raise CountsParseError("negative setting index", lineno)
        if any(v < 0 for v in counts):
            raise CountsParseError(f"negative count {min(counts)}", lineno)
        if (run, x, y) in seen:
            raise CountsParseError(f"duplicate record for run {run} settings {(x, y)}", lineno)
        seen.add((run, x, y))
        runs.setdefault(run, []).append(CountsRecord(x, y, counts))
    out = []
    for run, records in runs.items():
        run_id: int | str = int(run) if run.lstrip("-").isdigit() else run
        out.append(RunDataset(records, run_id=run_id))
    return out


def write_counts(runs: Iterable[RunDataset], path: str | Path | io.TextIOBase) -> None:
    if isinstance(path, (str, Path)):
        with open(path, "w", newline="") as fh:
            write_counts(runs, fh)
        return
    writer = csv.writer(path, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for run in runs:
        for r in run.records:
            writer.writerow([run.run_id, r.x, r.y, *r.n])


def summary_to_correlators(s: ExperimentSummary) -> CorrelatorSet:
    return CorrelatorSet(dict(s.correlators), dict(s.stderr))
