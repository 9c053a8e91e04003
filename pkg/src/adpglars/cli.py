"""Command-line entry point: ``adpglars {fit,cv,simulate,prostate,diagnostics}``.

Exit codes: 0 success, 2 usage or input error, 3 computational failure.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
import time

from . import data_io
from ._accel import backend_name
from .errors import DataError, GlarsError, InvalidComponentCount, InvalidSpec
from .estimators import ALGORITHM_NAMES, EstimatorSpec
from .glars_path import run_path, standardize
from .model_selection import SearchGrid
from .simulation import SimulationConfig, default_specs, evaluate_split, run_replications

log = logging.getLogger("adpglars")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_COMPUTE = 3

ESTIMATOR_CHOICES = list(ALGORITHM_NAMES) + ["all"]


class UsageError(Exception):
    pass


def _common_output(p):
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--prefix", default=None, help="file name prefix")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _estimator_opts(p, multi=True):
    p.add_argument(
        "--estimator",
        nargs="+" if multi else None,
        default=["all"] if multi else "adpLARS-LASSO",
        choices=ESTIMATOR_CHOICES if multi else list(ALGORITHM_NAMES),
        metavar="NAME",
        help="one or more of: " + ", ".join(ESTIMATOR_CHOICES if multi else ALGORITHM_NAMES),
    )
    p.add_argument("--h", type=int, default=None, help="explicit component count for PCRE/rk/rd")
    p.add_argument("--h-threshold", type=float, default=None, help="cumulative eigenvalue share (default 0.995)")


def _grid_opts(p):
    p.add_argument("--alpha-grid", type=float, nargs="+", default=None)
    p.add_argument("--k-grid", type=float, nargs="+", default=None)
    p.add_argument("--d-grid", type=float, nargs="+", default=None)
    p.add_argument("--svg", action="store_true", help="also write a box plot of per-replicate rmse")


def _input_opts(p, required=True):
    p.add_argument("--input", required=required, help="CSV file with a header row")
    p.add_argument("--response", default=None, help="response column name")
    p.add_argument("--drop", nargs="*", default=[], help="columns to ignore")
    p.add_argument("--tab", action="store_true", help="tab-delimited input")


def build_parser():
    parser = argparse.ArgumentParser(prog="adpglars", description="Adaptive generalized LARS paths and benchmarks.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one path and dump its breakpoints")
    _input_opts(p)
    _estimator_opts(p, multi=False)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--d", type=float, default=1.0)
    _common_output(p)

    p = sub.add_parser("cv", help="grid search on a hold-out split (or k folds) of a CSV")
    _input_opts(p)
    _estimator_opts(p)
    _grid_opts(p)
    p.add_argument("--train-frac", type=float, default=0.5)
    p.add_argument("--folds", type=int, default=None, help="use k-fold CV on the whole file instead")
    p.add_argument("--seed", type=int, default=0)
    _common_output(p)

    p = sub.add_parser("simulate", help="run the collinearity simulation study")
    _estimator_opts(p)
    _grid_opts(p)
    p.add_argument("--rho", type=float, nargs="+", default=[0.5, 0.7, 0.9])
    p.add_argument("--replicates", type=int, default=50)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=SimulationConfig.seed)
    p.add_argument("--n-total", type=int, default=100)
    p.add_argument("--train-frac", type=float, default=0.5)
    p.add_argument("--m", type=int, default=20, help="number of predictors")
    p.add_argument("--workers", type=int, default=None, help="process count (default: GLARS_THREADS or CPUs)")
    _common_output(p)

    p = sub.add_parser("prostate", help="benchmark on the bundled prostate data")
    _estimator_opts(p)
    _grid_opts(p)
    p.add_argument("--seed", type=int, default=None, help="random 67/30 split instead of the shipped one")
    _common_output(p)

    p = sub.add_parser("diagnostics", help="VIF and condition numbers (prostate by default)")
    _input_opts(p, required=False)
    p.add_argument("--out", default=None, help="write diagnostics JSON here")
    return parser


def _specs(args):
    names = list(ALGORITHM_NAMES) if "all" in args.estimator else list(dict.fromkeys(args.estimator))
    return default_specs(names, h_threshold=args.h_threshold, h=args.h)


def _grids(args, specs):
    return {
        name: SearchGrid.default(spec.kind, alphas=args.alpha_grid, ks=args.k_grid, ds=args.d_grid)
        for name, spec in specs.items()
    }


def _load_input(args):
    if not args.response:
        raise UsageError("--response is required with --input")
    return data_io.load_csv(args.input, args.response, delimiter="\t" if args.tab else ",", drop_columns=args.drop)


def _print_table(report, title):
    print(title)
    header = data_io.MEDIAN_HEADER
    rows = data_io.median_rows(report)
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for r in rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)))


def cmd_fit(args):
    ds = _load_input(args)
    kind = ALGORITHM_NAMES[args.estimator]
    extra = {}
    if kind.uses_components:
        if args.h is not None:
            extra["h"] = args.h
        if args.h_threshold is not None:
            extra["h_threshold"] = args.h_threshold
    spec = EstimatorSpec(kind, k=args.k, d=args.d, **extra)
    path = run_path(standardize(ds.X_raw, ds.y_raw), spec, args.alpha)
    files = data_io.write_path(path, args.format, args.out, args.prefix or "fit", ds.column_names)
    last = path.event(len(path) - 1)
    print(f"{len(path)} breakpoints, last event {last}, t = {path.terminal_t:.5f}")
    for f in files:
        print(f"wrote {f}")
    return EXIT_OK


def cmd_cv(args):
    ds = _load_input(args)
    specs = _specs(args)
    grids = _grids(args, specs)
    meta = {"kind": "cv", "input": Path(args.input).name, "seed": args.seed}
    if args.folds:
        meta["folds"] = args.folds
        report = evaluate_split(ds.to_dataset(), None, specs, grids, meta=meta, folds=args.folds)
    else:
        meta["train_frac"] = args.train_frac
        train, test = data_io.split_dataset(ds, args.train_frac, args.seed)
        report = evaluate_split(train.to_dataset(), test.to_dataset(), specs, grids, meta=meta)
    return _finish(report, args, args.prefix or "cv", "Hold-out evaluation")


def cmd_simulate(args):
    specs = _specs(args)
    grids = _grids(args, specs)
    n_train = int(round(args.train_frac * args.n_total))
    failures = 0
    for rho in args.rho:
        cfg = SimulationConfig(
            n_total=args.n_total,
            n_train=n_train,
            m=args.m,
            rho_collinearity=rho,
            sigma=args.sigma,
            n_replicates=args.replicates,
            seed=args.seed,
        )
        t0 = time.perf_counter()
        report = run_replications(cfg, specs, grids, workers=args.workers)
        log.info("rho=%g: %d replicates in %.1f s (%s)", rho, cfg.n_replicates, time.perf_counter() - t0, backend_name())
        prefix = f"{args.prefix or 'simulation'}_rho{rho:g}"
        _finish(report, args, prefix, f"Median hold-out RMSE, rho = {rho:g}")
        failures += report.failures
    if failures:
        print(f"error: {failures} replicate evaluations failed", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


def cmd_prostate(args):
    train, test = data_io.load_prostate(args.seed)
    specs = _specs(args)
    meta = {"kind": "prostate", "n_train": train.n, "n_test": test.n, "split_seed": args.seed}
    report = evaluate_split(train.to_dataset(), test.to_dataset(), specs, _grids(args, specs), meta=meta)
    code = _finish(report, args, args.prefix or "prostate", "Prostate hold-out RMSE")
    if report.failures:
        print(f"error: {report.failures} algorithms failed", file=sys.stderr)
        return EXIT_COMPUTE
    return code


def cmd_diagnostics(args):
    if args.input:
        ds = _load_input(args)
    else:
        ds, _ = data_io.load_prostate_full()
    diag = data_io.diagnostics(ds)
    for name, v in zip(ds.column_names, diag.vif):
        print(f"VIF {name:>12}: {v:.5f}")
    for name, v in diag.condition_numbers.items():
        print(f"condition number ({name}): {v:.5f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        target = out / "diagnostics.json"
        with open(target, "w") as fh:
            json.dump(data_io.diagnostics_to_dict(diag), fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {target}")
    return EXIT_OK


def _finish(report, args, prefix, title):
    _print_table(report, title)
    for f in data_io.write_report(report, args.format, args.out, prefix, svg=getattr(args, "svg", False)):
        print(f"wrote {f}")
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "cv": cmd_cv,
    "simulate": cmd_simulate,
    "prostate": cmd_prostate,
    "diagnostics": cmd_diagnostics,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, InvalidSpec, InvalidComponentCount, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GlarsError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
