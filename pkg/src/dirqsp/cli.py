"""Command line entry point: ``dirqsp {simulate, verify, bench}``.

Exit codes: 0 success, 2 input error, 3 numeric error, 4 verification failure.
"""
import argparse
import json
import logging
import sys

from ._precision import PRECISIONS
from .errors import DirQSPError, InputError
from .pipeline import (
    SUITES, bench, bench_csv, export_angles, load_angles, simulate, verify,
)
from .walk import HamiltonianSpec

EXIT_OK = 0


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def build_parser():
    parser = argparse.ArgumentParser(prog="dirqsp", description="Hamiltonian simulation with directionally "
                                     "controlled quantum signal processing.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the pipeline on a Hamiltonian spec file")
    sim.add_argument("spec", help="Hamiltonian spec (JSON)")
    sim.add_argument("--time", type=float, required=True, help="evolution time t")
    sim.add_argument("--epsilon", type=float, default=1e-8, help="target accuracy (default 1e-8)")
    sim.add_argument("--precision", choices=PRECISIONS, default="double")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--report", help="write the JSON report here (default: stdout)")
    sim.add_argument("--angles", help="also export the angle sequence as JSON")
    sim.add_argument("--force", action="store_true", help="ignore the tau cap")
    sim.add_argument("--no-timing", action="store_true", help="leave timing out of the report")

    ver = sub.add_parser("verify", help="run invariant suites")
    ver.add_argument("--suite", choices=SUITES + ("all",), default="all")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--angles", help="angle file to include in the theorem2 suite")
    ver.add_argument("--report", help="write the JSON summary here (default: stdout)")

    ben = sub.add_parser("bench", help="query counts versus the standard construction")
    ben.add_argument("--tau", type=_float_list, default=[2, 5, 10, 20, 30, 40, 60], help="comma-separated tau values")
    ben.add_argument("--epsilon", type=_float_list, default=[1e-6], help="comma-separated epsilon values")
    ben.add_argument("--csv", help="write the CSV here (default: stdout)")
    return parser


def cmd_simulate(args):
    spec = HamiltonianSpec.load(args.spec)
    result = simulate(spec, args.time, args.epsilon, precision=args.precision, force=args.force, seed=args.seed)
    _write(args.report, result.report.to_json(include_timing=not args.no_timing))
    if args.angles:
        export_angles(result.angles, args.angles)
    rep = result.report
    print(f"ok: tau={rep.tau:g} K={rep.K} error={rep.error_2norm:.3e} queries={rep.queries['directional']} "
          f"(standard {rep.queries['baseline_standard']}, ratio {rep.queries['ratio']:.3f})", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args):
    angles = load_angles(args.angles) if args.angles else None
    if angles is not None and args.suite not in ("theorem2", "all"):
        raise InputError("--angles is only used by the theorem2 suite")
    results = verify(args.suite, seed=args.seed, angles=angles)
    summary = {name: r.to_dict() for name, r in results.items()}
    _write(args.report, json.dumps(summary, indent=2, sort_keys=True))
    failed = [name for name, r in results.items() if not r.passed]
    for name, r in results.items():
        print(f"{'PASS' if r.passed else 'FAIL'} {name} ({r.checks} checks)", file=sys.stderr)
    return 4 if failed else EXIT_OK


def cmd_bench(args):
    _write(args.csv, bench_csv(bench(args.tau, args.epsilon)))
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "verify": cmd_verify, "bench": cmd_bench}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except DirQSPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
