"""Command-line entry point: ``hullsep {intersect|distance|support|verify|bench}``.

Exit codes: 0 certificate produced and self-verified, 1 verification failed,
2 iteration limit exceeded, 3 bad input, 4 numerical failure.
"""
import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .bodies import PIVOT_STRATEGIES
from .errors import (
    DimensionMismatch,
    EmptyBody,
    HullsepError,
    InfeasibleBody,
    NotAWitness,
    ParseError,
    PreconditionError,
    StartNotInBody,
    UnboundedBody,
    VerificationFailed,
)
from .instance import parse_instance
from .report import cmd_verify, dumps, load_report, solve, trace_records, verify_report

EXIT_OK, EXIT_VERIFY, EXIT_LIMIT, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3, 4
INPUT_ERRORS = (
    ParseError, DimensionMismatch, EmptyBody, StartNotInBody, UnboundedBody, InfeasibleBody,
    PreconditionError, NotAWitness, ValueError, OSError,
)
LOG_LEVELS = {"off": logging.CRITICAL + 10, "info": logging.INFO, "debug": logging.DEBUG}
BENCH_COLUMNS = ["instance", "eps", "strategy", "iterations", "support_calls", "delta", "lower", "wall_ms"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse's default exit status 2 would collide with "limits exceeded"
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _eps(text):
    x = float(text)
    if not 0.0 < x < 1.0:
        raise argparse.ArgumentTypeError(f"eps must lie in (0, 1), got {text}")
    return x


def _positive_int(text):
    k = int(text)
    if k <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return k


def _seed(text):
    k = int(text)
    if not 0 <= k < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return k


def build_parser():
    ap = _Parser(prog="hullsep", description="Intersection, separation and distance certificates for convex bodies.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def run_flags(p):
        p.add_argument("--instance", required=True, help="instance JSON file")
        p.add_argument("--eps", type=_eps, default=1e-3)
        p.add_argument("--max-iter", type=_positive_int, default=None)
        p.add_argument("--pivot-strategy", choices=PIVOT_STRATEGIES, default="max-violation")
        p.add_argument("--seed", type=_seed, default=None, help="scan order seed for first-violation")
        p.add_argument("--engine", choices=("naive", "gram"), default="naive")
        p.add_argument("--trace", default=None, help="write per-step records (JSON) here")
        p.add_argument("--exact-diameter", action="store_true")
        p.add_argument("--alternate-sides", action="store_true")
        p.add_argument("--report", default=None, help="write the report here instead of stdout")

    for name, help_ in (
        ("intersect", "common point or separating witness pair"),
        ("distance", "distance bracket with supporting hyperplanes"),
        ("support", "parallel supporting hyperplanes of near-optimal margin"),
    ):
        run_flags(sub.add_parser(name, help=help_))

    v = sub.add_parser("verify", help="re-check a report against its instance")
    v.add_argument("--report", required=True)
    v.add_argument("--instance", required=True)

    b = sub.add_parser("bench", help="iteration counts as CSV")
    b.add_argument("--instance", action="append", required=True)
    b.add_argument("--eps", type=_eps, action="append")
    b.add_argument("--pivot-strategy", choices=PIVOT_STRATEGIES, action="append")
    b.add_argument("--max-iter", type=_positive_int, default=None)
    b.add_argument("--seed", type=_seed, default=None)
    b.add_argument("--jobs", type=_positive_int, default=1)
    b.add_argument("--output", default=None)
    return ap


def _configure_logging():
    level = os.environ.get("HULLSEP_LOG", "off").lower()
    if level not in LOG_LEVELS:
        level = "off"
    logging.basicConfig(level=LOG_LEVELS[level], format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _summary(report):
    cert = report["certificate"]
    kind = cert["kind"]
    lines = [f"{report['command']}: {kind} after {report['counters']['iterations']} iterations"]
    if kind == "Intersection":
        lines.append(f"  gap {cert['gap']!r} (stop: {cert['stop']})")
    elif kind == "Witness":
        b = cert["bisector"]
        lines.append(f"  separating hyperplane h={b['normal']} a={b['offset']!r}")
    elif kind == "Distance":
        lines.append(f"  delta {cert['delta']!r}  lower {cert['lower']!r}")
        for key in ("H_v", "H_v_prime"):
            lines.append(f"  {key}: h={cert[key]['normal']} a={cert[key]['offset']!r}")
    if report.get("note"):
        lines.append(f"  note: {report['note']}")
    return "\n".join(lines)


def _run_command(args, out):
    inst = parse_instance(args.instance)
    outcome = solve(
        inst, args.command, eps=args.eps, max_iter=args.max_iter, strategy=args.pivot_strategy, seed=args.seed,
        engine=args.engine, alternate_sides=args.alternate_sides, exact_diameter=args.exact_diameter,
    )
    report = outcome.report
    if args.trace:
        Path(args.trace).write_text(json.dumps(trace_records(outcome.trace), indent=1) + "\n")
    if args.report:
        Path(args.report).write_text(dumps(report))
        print(_summary(report), file=out)
    else:
        out.write(dumps(report))
    if outcome.status != "ok":
        print(f"iteration limit exceeded; best pair has gap {report['certificate'].get('gap')!r}", file=sys.stderr)
        return EXIT_LIMIT
    failed = [c for c in verify_report(report, inst) if not c.passed]
    for c in failed:
        print(f"self-check failed: {c.name} residual={c.residual!r} {c.detail}", file=sys.stderr)
    return EXIT_VERIFY if failed else EXIT_OK


def _verify_command(args, out):
    try:
        checks = cmd_verify(args.report, args.instance)
    except VerificationFailed as exc:
        for c in verify_report(load_report(args.report), parse_instance(args.instance)):
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name} residual={c.residual!r} {c.detail}".rstrip(), file=out)
        print(str(exc), file=sys.stderr)
        return EXIT_VERIFY
    for c in checks:
        print(f"PASS {c.name} residual={c.residual!r} {c.detail}".rstrip(), file=out)
    return EXIT_OK


def bench_row(job):
    path, eps, strategy, max_iter, seed = job
    inst = parse_instance(path)
    outcome = solve(inst, "distance", eps=eps, max_iter=max_iter, strategy=strategy, seed=seed)
    r = outcome.report
    cert = r["certificate"]
    delta = cert.get("delta", cert.get("gap"))
    return {
        "instance": inst.name or Path(path).stem,
        "eps": eps,
        "strategy": strategy,
        "iterations": r["counters"]["iterations"],
        "support_calls": r["counters"]["support_calls"],
        "delta": "" if delta is None else repr(delta),
        "lower": repr(cert["lower"]) if "lower" in cert else "",
        "wall_ms": f"{r['wall_ms']:.3f}",
    }


def _bench_command(args, out):
    eps_list = args.eps or [1e-1, 1e-2, 1e-3]
    strategies = args.pivot_strategy or ["max-violation"]
    jobs = [(p, e, s, args.max_iter, args.seed) for p in args.instance for e in eps_list for s in strategies]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(bench_row, jobs))
    else:
        rows = [bench_row(j) for j in jobs]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if args.output:
        Path(args.output).write_text(buf.getvalue())
    else:
        out.write(buf.getvalue())
    return EXIT_OK


def main(argv=None, out=None):
    out = out or sys.stdout
    _configure_logging()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT
    try:
        if args.command == "verify":
            return _verify_command(args, out)
        if args.command == "bench":
            return _bench_command(args, out)
        return _run_command(args, out)
    except INPUT_ERRORS as exc:
        print(f"hullsep: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except HullsepError as exc:
        print(f"hullsep: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
