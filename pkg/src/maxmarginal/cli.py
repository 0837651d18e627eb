"""Command line interface: ``maxmarginal {stat,test,power}``.

Exit codes: 0 success, 2 usage / parse / parameter error, 3 the data violate
a statistical precondition (a constant column in strict mode).

Records printed by ``stat`` and ``test`` are single JSON objects whose keys
appear in a fixed order; floats carry 17 significant digits.  Output never
contains timings, so repeated runs are byte-identical.  ``--record PATH``
writes a run record (parameters, version, wall-clock duration) separately.
"""
import argparse
import contextlib
import csv
import io
import json
import os
import sys
import time
from dataclasses import replace

from . import __version__
from .csvio import format_number, read_matrix, write_matrix
from .dcor import check_paired, unbiased_dcor
from .errors import DegenerateSample, MaxMarginalError
from .inference import (
    DEFAULT_PERMUTATIONS,
    DEFAULT_SEED,
    METHODS,
    TEST_KINDS,
    run_test,
)
from .marginal import THREADS_ENV, default_threads, marginal_grid, max_marginal
from .power import (
    CSV_COLUMNS,
    PRESETS,
    StudyConfig,
    power_study,
    preset,
    read_results_csv,
    write_results_csv,
    write_results_json,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


def dumps(record):
    """JSON text of a flat or nested record with 17-digit floats."""
    if isinstance(record, dict):
        items = ", ".join(f"{json.dumps(k)}: {dumps(v)}" for k, v in record.items())
        return "{" + items + "}"
    if isinstance(record, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in record) + "]"
    if isinstance(record, bool) or record is None:
        return json.dumps(record)
    if isinstance(record, int):
        return str(record)
    if isinstance(record, float):
        return format_number(record)
    return json.dumps(record)


def _load_pair(args):
    x, _ = read_matrix(args.x_file)
    y, _ = read_matrix(args.y_file)
    return check_paired(x, y)


def _write_record(path, command, params, started, outputs):
    record = {
        "command": command,
        "parameters": params,
        "version": __version__,
        "duration_seconds": time.perf_counter() - started,
        "outputs": outputs,
    }
    with open(path, "w") as fh:
        fh.write(dumps(record) + "\n")


def _params(args):
    skip = {"func", "record"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def cmd_stat(args, out):
    started = time.perf_counter()
    x, y = _load_pair(args)
    n, p, q = x.shape[0], x.shape[1], y.shape[1]
    record = {"method": args.method}
    grid = None
    if args.method != "full" or args.grid:
        grid = marginal_grid(
            x, y, permissive=args.permissive_columns, threads=args.threads
        )
    if args.method == "full":
        record["statistic"] = unbiased_dcor(x, y).dcor
    else:
        agg = max_marginal(grid)
        if args.method == "max":
            record["statistic"] = agg.max_value
            record["argmax"] = list(agg.argmax)
        else:
            record["statistic"] = agg.avg_value
    record.update({"n": n, "p": p, "q": q})
    if args.grid:
        write_matrix(args.grid, grid.values)
        record["grid"] = args.grid
    out.write(dumps(record) + "\n")
    if args.record:
        _write_record(args.record, "stat", _params(args), started, record)


def cmd_test(args, out):
    started = time.perf_counter()
    x, y = _load_pair(args)
    outcome = run_test(
        x, y, args.method, args.test,
        r=args.permutations, seed=args.seed, raw_pvalue=args.raw_pvalue,
        permissive=args.permissive_columns, threads=args.threads,
    )
    record = outcome.to_dict()
    record["alpha"] = args.alpha
    record["decision"] = "reject" if outcome.p_value < args.alpha else "retain"
    record["raw_pvalue"] = bool(args.raw_pvalue) if args.test == "permutation" else None
    out.write(dumps(record) + "\n")
    if args.record:
        _write_record(args.record, "test", _params(args), started, record)


def _load_config(args):
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise MaxMarginalError(f"cannot read config {args.config}: {exc}") from None
        config = StudyConfig.from_dict(data)
    else:
        config = preset(args.preset)
    config = config.restrict(args.relationship, args.replicates, args.seed)
    if args.permutations is not None:
        config = replace(config, permutations=args.permutations)
    return config.validate()


def _atomic_write(path, write):
    tmp = f"{path}.partial"
    with open(tmp, "w", newline="") as fh:
        write(fh)
    os.replace(tmp, path)


def cmd_power(args, out):
    started = time.perf_counter()
    config = _load_config(args)
    completed = {}
    if args.resume and args.out and os.path.exists(args.out):
        with open(args.out, newline="") as fh:
            completed = read_results_csv(fh)

    finished = []

    def progress(done, total, points):
        finished.extend(points)
        if args.out:
            # partial table, rewritten after every point so a run can resume
            _atomic_write(args.out, lambda fh: _write_points(fh, finished))
        if args.verbose:
            print(f"[{done}/{total}] {points[0].scenario}", file=sys.stderr)

    curves = power_study(
        config, threads=args.threads, completed=completed, progress=progress
    )
    if args.out:
        _atomic_write(args.out, lambda fh: write_results_csv(curves, fh))
    else:
        write_results_csv(curves, out)
    if args.json:
        _atomic_write(args.json, lambda fh: write_results_json(curves, fh, config))
    if args.record:
        _write_record(args.record, "power", _params(args), started,
                      {"out": args.out, "json": args.json,
                       "points": sum(len(c.points) for c in curves)})


def _write_points(fh, points):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for pt in points:
        writer.writerow(pt.row())


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _alpha(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {value}")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="maxmarginal",
        description="High-dimensional independence testing with maximum "
                    "marginal distance correlation.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--threads", type=_positive_int, default=None,
        help=f"thread cap (default: ${THREADS_ENV}, else the CPU count)",
    )
    common.add_argument("--record", metavar="PATH",
                        help="write a run record with timing to PATH")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("x_file", help="CSV file, one row per sample")
    data.add_argument("y_file", help="CSV file with the same number of rows")
    data.add_argument("--method", choices=METHODS, default="max")
    data.add_argument("--permissive-columns", action="store_true",
                      help="skip constant columns instead of failing")

    p_stat = sub.add_parser("stat", parents=[common, data],
                            help="compute the test statistic")
    p_stat.add_argument("--grid", metavar="PATH",
                        help="write the p x q marginal grid as CSV")
    p_stat.set_defaults(func=cmd_stat)

    p_test = sub.add_parser("test", parents=[common, data],
                            help="test independence")
    p_test.add_argument("--test", choices=TEST_KINDS, default="chisquare")
    p_test.add_argument("--permutations", type=_positive_int,
                        default=DEFAULT_PERMUTATIONS, metavar="R")
    p_test.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_test.add_argument("--alpha", type=_alpha, default=0.05)
    p_test.add_argument("--raw-pvalue", action="store_true",
                        help="report #{replicate > observed} / r")
    p_test.set_defaults(func=cmd_test)

    p_power = sub.add_parser("power", parents=[common],
                             help="Monte-Carlo power study")
    src = p_power.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=sorted(PRESETS), default="figure1")
    src.add_argument("--config", metavar="PATH", help="JSON study config")
    p_power.add_argument("--seed", type=int, default=None,
                         help="override the study seed")
    p_power.add_argument("--replicates", type=_positive_int, default=None)
    p_power.add_argument("--permutations", type=_positive_int, default=None,
                         metavar="R")
    p_power.add_argument("--relationship", action="append", metavar="NAME",
                         help="keep only this relationship (repeatable)")
    p_power.add_argument("--out", metavar="PATH",
                         help="results CSV (default: stdout)")
    p_power.add_argument("--json", metavar="PATH", help="also write JSON results")
    p_power.add_argument("--resume", action="store_true",
                         help="reuse finished points found in --out")
    p_power.add_argument("-v", "--verbose", action="store_true")
    p_power.set_defaults(func=cmd_power)
    return parser


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stderr(err):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.threads = default_threads(args.threads)
        buffer = io.StringIO()
        args.func(args, buffer)
    except DegenerateSample as exc:
        err.write(f"error: {exc}\n")
        return EXIT_DATA
    except (MaxMarginalError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    out.write(buffer.getvalue())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
