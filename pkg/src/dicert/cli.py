"""Command line: ``dicert simulate | certify | ingest | reproduce``.

Exit codes: 0 success, 1 invalid input, 2 solver failure, 3 reproduction
mismatch.  Solver tolerances can be overridden through ``DICERT_GAP_TOL``,
``DICERT_FEAS_TOL`` and ``DICERT_MAX_ITER``.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from typing import Sequence

from . import stats, tables
from .certify import (
    BASIS_KINDS,
    CertificationTask,
    ConstraintSet,
    bell_geq,
    certify,
    correlators_ineq,
    finite_stat_adjust,
    rate_report,
)
from .qmodel import (
    BellExpression,
    apply_white_noise,
    bell_value,
    classical_bound,
    ideal_correlators,
    make_bell,
    relative_bell_value,
    tsirelson_bound,
)
from .sdp import SolverOptions

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_MISMATCH = 0, 1, 2, 3

log = logging.getLogger("dicert")


class UsageError(ValueError):
    pass


def solver_options() -> SolverOptions:
    kw = {}
    for env, key, conv in (("DICERT_GAP_TOL", "gap_tol", float), ("DICERT_FEAS_TOL", "feas_tol", float),
                           ("DICERT_MAX_ITER", "max_iterations", int)):
        if os.environ.get(env):
            try:
                kw[key] = conv(os.environ[env])
            except ValueError:
                raise UsageError(f"{env}={os.environ[env]!r} is not a valid number") from None
    return SolverOptions(**kw)


def _expression(args) -> BellExpression:
    family = tables.canonical_family(args.family)
    if family == "ModCHSH":
        return make_bell(family)
    raw = args.param
    if raw is None:
        raw = args.delta if family == "IDelta" else args.gamma
    if raw is None:
        raise UsageError(f"family {family} needs --{'delta' if family == 'IDelta' else 'gamma'}")
    return make_bell(family, tables.parse_parameter(raw))


def _angles(args, e: BellExpression) -> tuple[list[float], list[float]]:
    if args.angles:
        parts = [float(v) for v in args.angles.split(",")]
        if len(parts) != 4 or not all(math.isfinite(v) for v in parts):
            raise UsageError("--angles needs four finite numbers: a0,a1,b0,b1 (degrees)")
        return parts[:2], parts[2:]
    found = tables.angles_for(e.family, e.parameter) if e.parameter is not None else None
    if found is None:
        raise UsageError(f"no tabulated angles for {e}; pass --angles a0,a1,b0,b1")
    return found


def _emit(args, payload: dict, text: str) -> None:
    if getattr(args, "json", False):
        out = json.dumps(payload, indent=2, sort_keys=True)
    else:
        out = text
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(out + "\n")
    print(out)


def cmd_simulate(args) -> int:
    e = _expression(args)
    if e.n_settings != (2, 2):
        raise UsageError("simulation uses two HWP angles per party")
    alice, bob = _angles(args, e)
    if not 0 <= args.eta <= 1:
        raise UsageError("--eta must lie in [0, 1]")
    c = apply_white_noise(ideal_correlators(alice, bob), args.eta)
    value = bell_value(c, e)
    payload = {
        "expression": str(e),
        "angles": {"alice": alice, "bob": bob},
        "eta": args.eta,
        "correlators": c.to_json()["values"],
        "bell_value": value,
        "relative_value": relative_bell_value(value, e),
        "quantum_bound": tsirelson_bound(e),
        "classical_bound": classical_bound(e),
    }
    corr = "  ".join(f"C{k[0]}{k[1]}={v:+.5f}" for k, v in sorted(c.values.items()))
    text = (f"{e}  eta={args.eta}\n{corr}\nBell value {value:.4f}  relative {payload['relative_value']:.4f}  "
            f"(classical {payload['classical_bound']:.4f}, quantum {payload['quantum_bound']:.4f})")
    _emit(args, payload, text)
    return EXIT_OK


def _constraints(args, e: BellExpression) -> tuple[ConstraintSet, str]:
    given = [args.bell is not None, args.correlators is not None, args.summary is not None]
    if sum(given) != 1:
        raise UsageError("give exactly one of --bell, --correlators, --summary")
    if args.bell is not None:
        value = args.bell
        if args.stderr_down:
            if args.stderr is None:
                raise UsageError("--stderr-down needs --stderr")
            value = finite_stat_adjust(value, args.stderr, args.stderr_down)
        return bell_geq(e, value), f"Bell >= {value:.6f}"
    if args.correlators is not None:
        vals = [float(v) for v in args.correlators.split(",")]
        if len(vals) != 4:
            raise UsageError("--correlators needs C00,C01,C10,C11")
        keys = [(0, 0), (0, 1), (1, 0), (1, 1)]
        return correlators_ineq(dict(zip(keys, vals))), "correlators " + ",".join(f"{v:+.4f}" for v in vals)
    with open(args.summary) as fh:
        summary = stats.ExperimentSummary.from_json(fh.read())
    c = stats.summary_to_correlators(summary)
    if args.use == "bell":
        value, err = bell_value(c, e)
        if args.stderr_down:
            value = finite_stat_adjust(value, err, args.stderr_down)
        return bell_geq(e, value), f"Bell >= {value:.6f} (from summary)"
    return correlators_ineq(c.values), "correlators from summary"


def cmd_certify(args) -> int:
    e = _expression(args)
    constraints, what = _constraints(args, e)
    task = CertificationTask(constraints, method=args.method, nodes=args.nodes, level=args.level,
                             basis=args.basis, options=solver_options())
    result = certify(task)
    payload = result.to_json()
    payload["constraint"] = what
    text = f"{e}  {what}\n{args.method}: {result.entropy_bits:.4f} bits" + ("" if result.certified else "  (NOT certified)")
    if args.rate:
        rates = rate_report(result, args.rate)
        payload["bits_per_second"] = rates
        text += f"\n{rates[result.method]:.1f} bits/s at {args.rate} events/s"
    _emit(args, payload, text)
    return EXIT_OK if result.certified else EXIT_SOLVER


def cmd_ingest(args) -> int:
    runs = stats.load_counts(args.counts)
    if not runs:
        raise UsageError(f"{args.counts}: no records")
    if args.seconds:
        for run in runs:
            run.seconds = args.seconds
    summary = stats.aggregate_runs(runs, mode=args.mode)
    payload = summary.to_json()
    text_lines = [f"{len(runs)} runs, {summary.total_events} events"]
    for (x, y), c in sorted(summary.correlators.items()):
        text_lines.append(f"C{x}{y} = {c:+.5f} +/- {summary.stderr[(x, y)]:.5f}  (N={summary.counts[(x, y)]})")
    if args.family:
        e = _expression(args)
        value, err = bell_value(stats.summary_to_correlators(summary), e)
        spread = stats.run_spread(summary, e)
        payload["bell"] = {"expression": str(e), "value": value, "stderr": err, "run_spread": spread}
        text_lines.append(f"{e} = {value:.4f} +/- {err:.4f} (spread over runs {spread:.4f})")
    _emit(args, payload, "\n".join(text_lines))
    return EXIT_OK


def _entropy_compute(method: str, level: int, nodes: int, basis: str, stderr_down: float):
    options = solver_options()

    def compute(e: BellExpression, threshold: float, row: dict) -> float:
        if stderr_down:
            threshold = finite_stat_adjust(threshold, float(row["stderr"]), stderr_down)
        task = CertificationTask(bell_geq(e, threshold), method=method, nodes=nodes, level=level,
                                 basis=basis, options=options)
        result = certify(task)
        return result.entropy_bits if result.certified else float("nan")

    return compute


def cmd_reproduce(args) -> int:
    reports = []
    for name in tables.iter_keys(args.table):
        if name.startswith("violation-"):
            reports.append(tables.violation_table(name[len("violation-"):]))
        elif name == "angles":
            reports.append(tables.angles_table())
        elif name == "rates":
            reports.append(tables.rates_table())
        else:
            key = name[len("entropy-"):]
            reports.append(tables.entropy_table(key, "hmin", _entropy_compute("minentropy", 2, 6, "standard", 0), 0.02))
            if args.vonneumann:
                reports.append(tables.entropy_table(
                    key, "bell6", _entropy_compute("vonneumann", 2, 6, args.basis, 0), 0.03))
                if key == "I-lowrate":
                    reports.append(tables.entropy_table(
                        key, "bell6_finite", _entropy_compute("vonneumann", 2, 6, args.basis, 1.0), 0.03))
    payload = {"tables": [r.to_json() for r in reports], "pass": all(r.passed for r in reports)}
    _emit(args, payload, "\n\n".join(r.format() for r in reports))
    return EXIT_OK if payload["pass"] else EXIT_MISMATCH


def _add_family(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--family", required=required, help="I (I_delta), J (J_gamma) or modCHSH")
    p.add_argument("--delta", help="I_delta parameter")
    p.add_argument("--gamma", help="J_gamma parameter; accepts pi/24 style literals")
    p.add_argument("--param", help="family parameter (alternative to --delta/--gamma)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dicert", description="Device-independent randomness certification")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="ideal or noisy phi+ correlators at HWP angles")
    _add_family(p)
    p.add_argument("--angles", help="a0,a1,b0,b1 in degrees (default: tabulated angles)")
    p.add_argument("--eta", type=float, default=1.0, help="white-noise visibility")
    p.add_argument("--json", action="store_true")
    p.add_argument("--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("certify", help="lower-bound the randomness of (x*, y*) = (0, 0)")
    _add_family(p)
    p.add_argument("--bell", type=float, help="observed Bell value (constraint: >=)")
    p.add_argument("--stderr", type=float, help="standard error of --bell")
    p.add_argument("--stderr-down", type=float, default=0.0, help="lower the Bell threshold by k stderr")
    p.add_argument("--correlators", help="C00,C01,C10,C11 (constraints: >=, >=, >=, <=)")
    p.add_argument("--summary", help="ingest summary JSON")
    p.add_argument("--use", choices=("bell", "correlators"), default="bell", help="constraint type for --summary")
    p.add_argument("--method", choices=("minentropy", "vonneumann"), default="minentropy")
    p.add_argument("--nodes", type=int, default=6)
    p.add_argument("--level", type=int, default=2)
    p.add_argument("--basis", choices=BASIS_KINDS, default="products")
    p.add_argument("--rate", type=float, help="events per second for a bits/s figure")
    p.add_argument("--json", action="store_true")
    p.add_argument("--output")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("ingest", help="summarize a counts CSV (run,x,y,n00,n01,n10,n11)")
    p.add_argument("counts")
    _add_family(p, required=False)
    p.add_argument("--mode", choices=stats.MODES, default="per-run-stddev")
    p.add_argument("--seconds", type=float, help="collection time per run, for the event rate")
    p.add_argument("--json", action="store_true")
    p.add_argument("--output")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("reproduce", help="compare against the bundled reference tables")
    p.add_argument("--table", action="append", default=None, help=f"one of {', '.join(tables.TABLE_NAMES)}, all")
    p.add_argument("--vonneumann", action="store_true", help="also compute the von Neumann columns (slow)")
    p.add_argument("--basis", choices=BASIS_KINDS, default="products")
    p.add_argument("--json", action="store_true")
    p.add_argument("--output")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "reproduce" and not args.table:
        args.table = ["all"]
    try:
        return args.func(args)
    except (UsageError, ValueError, KeyError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
