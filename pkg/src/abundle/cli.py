"""Command-line front end: ``abundle build`` and ``abundle run``.

Exit status is 0 when every selected suite passes, 1 when the report verdict
is a failure and 2 for unusable input (unknown fixture, unparseable file,
bad arguments).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import fixtures
from .calculus import DEFAULT_STEP
from .errors import ParseError, UnknownFixture
from .report import SUITES, RunFlags, build_report, dumps, resolve_suites, run_suite, summary_lines

REPORT_DIR_ENV = "ABUNDLE_REPORT_DIR"


def _descriptor(args) -> fixtures.FixtureDescriptor:
    src = args.fixture
    if src.endswith(".json") or os.sep in src or Path(src).is_file():
        d = fixtures.load(src)
        if args.grid_size is not None and args.grid_size != d.grid_size:
            raise ParseError(f"fixture file is for grid size {d.grid_size}, not {args.grid_size}")
        return d
    return fixtures.describe(src, args.seed, args.grid_size or 8)


def _report_path(path: str | None, default_name: str) -> Path | None:
    env = os.environ.get(REPORT_DIR_ENV)
    if path is None:
        return Path(env) / default_name if env else None
    p = Path(path)
    return Path(env) / p if env and not p.is_absolute() else p


def _write(text: str, path: Path | None):
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_list(args) -> int:
    for name in fixtures.fixture_names():
        print(f"{name:<22} {fixtures.describe(name).notes}")
    return 0


def cmd_build(args) -> int:
    d = _descriptor(args)
    fixtures.build(d)  # fail early if the descriptor does not construct
    text = fixtures.dumps(d)
    if args.output:
        _write(text, Path(args.output))
    else:
        sys.stdout.write(text)
    return 0


def cmd_run(args) -> int:
    d = _descriptor(args)
    fx = fixtures.build(d)
    flags = RunFlags(step=args.step, tol=args.tol, samples=args.samples, seed=args.seed,
                     directions=args.directions, diagonal_only=args.diagonal_only)
    results = run_suite(fx, resolve_suites(args.suite), flags)
    report = build_report(fx, results, flags)
    path = _report_path(args.report, f"{fx.name}.report.json")
    if path is not None:
        _write(dumps(report), path)
    if not args.quiet:
        print("\n".join(summary_lines(report)))
        if path is not None:
            print(f"report written to {path}")
    return 0 if report["verdict"] == "pass" else 1


def _suite_arg(text: str) -> str:
    try:
        resolve_suites(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return text


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abundle", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list named fixtures").set_defaults(func=cmd_list)

    def fixture_opts(p):
        p.add_argument("--fixture", required=True, help="fixture name or path to a fixture file")
        p.add_argument("--grid-size", type=int, default=None, help="grid points (default 8)")
        p.add_argument("--seed", type=int, default=fixtures.DEFAULT_SEED)

    b = sub.add_parser("build", help="write a fixture file")
    fixture_opts(b)
    b.add_argument("--output", "-o", help="output path (default stdout)")
    b.set_defaults(func=cmd_build)

    r = sub.add_parser("run", help="run verification suites and emit a report")
    fixture_opts(r)
    r.add_argument("--suite", type=_suite_arg, default="all",
                   help=f"comma-separated subset of: {', '.join(SUITES)} (default all)")
    r.add_argument("--step", type=float, default=DEFAULT_STEP, help="finite-difference step")
    r.add_argument("--tol", type=float, default=1e-6, help="tolerance for connection identities")
    r.add_argument("--samples", type=int, default=32, help="sample points per suite")
    r.add_argument("--directions", type=int, default=8, help="tangent directions per point")
    r.add_argument("--diagonal-only", action=argparse.BooleanOptionalAction, default=True,
                   help="grade compatibility on diagonal tangent pairs only")
    r.add_argument("--report", help=f"report path (relative paths resolve under ${REPORT_DIR_ENV})")
    r.add_argument("--quiet", "-q", action="store_true")
    r.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    if getattr(args, "grid_size", None) is not None and args.grid_size < 1:
        print("error: --grid-size must be positive", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (UnknownFixture, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
