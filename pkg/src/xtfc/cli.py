"""``xtfc`` command line: solve, mc, sweep and compare subcommands."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

from .activation import ActivationKind
from .bench import PUBLISHED, RunConfig, compare_table, monte_carlo, run_once, sweep
from .problems import PROBLEM_IDS, get_problem

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for non-convergence here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"point counts must be positive, got {text!r}")
    return vals


def _range_pair(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo,hi, got {text!r}")
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"weight range needs lo < hi, got {text!r}")
    return lo, hi


def _values(text: str) -> list[int]:
    """``a:b:step`` (inclusive of ``b`` when reached) or a comma list."""
    try:
        if ":" in text:
            parts = [int(v) for v in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            a, b, step = parts
            if step <= 0:
                raise argparse.ArgumentTypeError("step must be positive")
            return list(range(a, b + 1, step))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b:step or a comma list, got {text!r}")


def _add_run_options(p):
    p.add_argument("--problem", required=True, choices=PROBLEM_IDS)
    p.add_argument("--neurons", type=int)
    p.add_argument("--points", type=_int_list, help="points per axis, n1,n2,... (one value applies to all axes)")
    p.add_argument("--activation", choices=[k.value for k in ActivationKind])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--weight-range", type=_range_pair, help="lo,hi; write --weight-range=-1,1 when lo is negative")
    p.add_argument("--tol", type=float)
    p.add_argument("--rcond", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes for repeated trials")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="xtfc", description="X-TFC solver benchmarks")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="one run, JSON report")
    _add_run_options(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("mc", help="Monte-Carlo study over consecutive seeds")
    _add_run_options(p)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", help="histogram of log10 test error as CSV")

    p = sub.add_parser("sweep", help="error versus points per side or neurons")
    _add_run_options(p)
    p.add_argument("--axis", required=True, choices=["points", "neurons"])
    p.add_argument("--values", required=True, type=_values)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("compare", help="measured errors next to published baselines")
    _add_run_options(p)
    p.add_argument("--out", required=True)
    return parser


def _config(args) -> RunConfig:
    dim = get_problem(args.problem).dim
    if args.points is not None and len(args.points) not in (1, dim):
        raise UsageError(f"{args.problem} needs 1 or {dim} point counts, got {len(args.points)}")
    try:
        return RunConfig.defaults(
            args.problem,
            neurons=args.neurons,
            points=args.points,
            activation=args.activation,
            seed=args.seed,
            weight_range=args.weight_range,
            tol=args.tol,
            rcond=args.rcond,
            max_iter=args.max_iter,
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _write_csv(path, rows, header):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=header)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if v is None else v) for k, v in row.items()})


def _cmd_solve(args):
    report = run_once(args.problem, _config(args))
    _write_json(args.out, report.to_dict())
    print(f"{report.problem}: test max error {report.test_max_error:.3e}, "
          f"{report.iterations} iteration(s), {report.message}")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _cmd_mc(args):
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    summary = monte_carlo(args.problem, _config(args), args.trials, args.workers)
    _write_json(args.out, summary.to_dict())
    if args.csv:
        _write_csv(args.csv, summary.histogram_rows(), ["log10_error_lo", "log10_error_hi", "count"])
    print(f"{summary.problem}: {summary.trials} trials, median test max error {summary.median:.3e}, "
          f"{summary.failures} failure(s)")
    return EXIT_OK if summary.failures == 0 else EXIT_NOT_CONVERGED


def _cmd_sweep(args):
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    try:
        curve = sweep(args.problem, args.axis, args.values, args.trials, _config(args), args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _write_csv(args.out, curve.rows(), [curve.axis, "max_test_error", "median_test_error", "failures"])
    for row in curve.rows():
        print(f"{curve.axis}={row[curve.axis]}: max test error {row['max_test_error']:.3e}")
    return EXIT_OK if sum(curve.failures) == 0 else EXIT_NOT_CONVERGED


def _cmd_compare(args):
    if args.problem not in PUBLISHED:
        raise UsageError(f"no published baselines for {args.problem!r}; choose from {', '.join(PUBLISHED)}")
    report = run_once(args.problem, _config(args))
    rows = compare_table(args.problem, report)
    _write_csv(args.out, rows, ["method", "train_max_error", "test_max_error", "source"])
    for row in rows:
        train = "-" if row["train_max_error"] is None else f"{row['train_max_error']:.3g}"
        print(f"{row['method']:<26} train {train:<10} test {row['test_max_error']:.3g}")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


COMMANDS = {"solve": _cmd_solve, "mc": _cmd_mc, "sweep": _cmd_sweep, "compare": _cmd_compare}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"xtfc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"xtfc: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
