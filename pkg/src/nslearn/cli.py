"""Command-line front end.

Subcommands::

    nslearn fit        --data Y.csv --orientation rows --method nsreg --lags 2 --split 4000
    nslearn predict    --fit fit.json --data Y.csv --orientation rows --lags 2
    nslearn eval       --obs Y.csv --pred Z.csv --orientation columns
    nslearn simulate   --scenario exp1e --d 100 --n 1000 --seed 42 --out sim/
    nslearn experiment --scenario exp1e --seed 0 --out report.json

Every CSV body is the raw matrix in the stated orientation: with
``--orientation columns`` each column is one series, with ``rows`` each row
is one series (for lagged data, rows are time steps and columns are series).
The orientation is never guessed from the shape.

Exit status is 0 on success, 2 on usage errors and 1 on any other failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import platform
import sys
from importlib import metadata
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .core import Orientation, SplitSpec, split
from .exceptions import NSLearnError, ShapeMismatch
from .experiments import (
    REGRESSION_METHODS,
    evaluation_report,
    fit_method,
    run_dataset_experiment,
    run_experiment,
)
from .io import IngestSpec, build_lag_design, emit_csv, ingest_csv, own_lag_columns, read_matrix, write_matrix
from .losses import NS, nse_ext, realized_loss
from .regression import DesignMatrix, FitResult, augment, predict
from .simulate import EXP1_SCENARIOS, REGRESSION_SCENARIOS, generate_exp1, generate_exp_regression

__all__ = ["main", "build_parser"]

SCENARIOS = EXP1_SCENARIOS + REGRESSION_SCENARIOS
THREADS_ENV = "NS_LEARN_THREADS"


class UsageError(Exception):
    """Bad flag combination detected after argparse has run."""


def _dump(doc, out):
    text = json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w") as fh:
            fh.write(text)


def _manifest(args, outputs):
    try:
        version = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        version = None
    return {
        "command": args.command,
        "arguments": {
            k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")
        },
        "outputs": outputs,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "package_version": version,
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


def _manifest_path(out):
    path = Path(out)
    return path.with_name(path.stem + ".manifest.json")


def _ingest(path, args):
    spec = IngestSpec(
        path,
        Orientation.parse(args.orientation),
        has_header=not args.no_header,
        time_column=args.time_column,
        lags=getattr(args, "lags", 0) or 0,
    )
    return ingest_csv(spec)


def _read_predictors(path, args):
    _, X = read_matrix(path, not args.no_header, None)
    return X


def _problem(args):
    """Ingest responses and build the design for fit/predict.

    Returns ``(DesignMatrix, Panel, feature_groups)``.
    """
    Y = _ingest(args.data, args)
    lags = args.lags or 0
    if lags and args.predictors:
        raise UsageError("--lags and --predictors are mutually exclusive")
    if lags:
        if Y.orientation is not Orientation.ROWS:
            raise UsageError("--lags needs --orientation rows (one time step per row)")
        design, Y = build_lag_design(Y, lags)
        d = Y.series_length
        groups = [own_lag_columns(j, d, lags) for j in range(d)]
        return design, Y, groups
    if args.predictors:
        design = augment(_read_predictors(args.predictors, args), Y.orientation)
    else:
        design = augment(None, Y.orientation, Y.n_series)
    if design.n_obs != Y.n_series:
        raise ShapeMismatch(
            f"predictors have {design.n_obs} observations, responses have {Y.n_series}"
        )
    return design, Y, None


def _head(design, Y, boundary):
    """First ``boundary`` observations and the remainder."""
    if boundary is None:
        return (design, Y), (None, None)
    Y_train, Y_test = split(Y, SplitSpec(boundary, "series"))
    P = design.predictors
    return (
        (DesignMatrix(P[:boundary], design.orientation), Y_train),
        (DesignMatrix(P[boundary:], design.orientation), Y_test),
    )


def _ns_loss(a):
    return NS if not a else nse_ext(a)


def cmd_fit(args):
    design, Y, groups = _problem(args)
    (X_train, Y_train), _ = _head(design, Y, args.split)
    fit = fit_method(args.method, X_train, Y_train, args.extended_a or 0.0, groups)
    train_ns = realized_loss(predict(fit, X_train), Y_train, _ns_loss(args.extended_a))
    doc = fit.to_dict()
    doc.update(
        {
            "lags": args.lags or 0,
            "split": args.split,
            "n_train": Y_train.n_series,
            "train_realized_ns": train_ns,
        }
    )
    _dump(doc, args.out)
    print(
        f"condition estimate {fit.condition_estimate:.6g}; "
        f"train realized NS loss {train_ns:.6g}",
        file=sys.stderr,
    )
    return 0


def _load_fit(path):
    with open(path) as fh:
        doc = json.load(fh)
    return FitResult.from_dict(doc), doc


def cmd_predict(args):
    fit, doc = _load_fit(args.fit)
    if Orientation.parse(args.orientation) is not fit.orientation:
        raise ShapeMismatch(
            f"fit was estimated in {fit.orientation.value!r} orientation, "
            f"got --orientation {args.orientation}"
        )
    if args.lags is None:
        args.lags = doc.get("lags", 0)
    design, Y, _ = _problem(args)
    Z = predict(fit, design)
    if args.out is None:
        raise UsageError("predict needs --out for the prediction CSV")
    emit_csv(Z, args.out)
    return 0


def cmd_eval(args):
    a = args.extended_a or 0.0
    if args.pred:
        if args.fit:
            raise UsageError("give either --pred or --fit, not both")
        Y = _ingest(args.obs, args)
        Z = _ingest(args.pred, args)
        method, p = args.method or "predictions", None
    elif args.fit:
        fit, doc = _load_fit(args.fit)
        if args.lags is None:
            args.lags = doc.get("lags", 0)
        args.data = args.obs
        design, Y, _ = _problem(args)
        _, (X_test, Y_test) = _head(design, Y, args.split)
        if X_test is not None:
            design, Y = X_test, Y_test
        Z = predict(fit, design)
        method, p = fit.method, fit.p
    else:
        raise UsageError("eval needs --pred or --fit")
    report = evaluation_report(Z, Y, method, a=a, p=p, seed=args.seed, units=args.units)
    _dump(report, args.out)
    return 0


def cmd_simulate(args):
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    dims = {k: getattr(args, k) for k in ("d", "n") if getattr(args, k) is not None}
    if args.scenario in EXP1_SCENARIOS:
        sim = generate_exp1(
            args.scenario, seed=args.seed, rho=args.rho, correlation=args.correlation, **dims
        )
    else:
        if args.p is not None:
            dims["p"] = args.p
        sim = generate_exp_regression(
            args.scenario, seed=args.seed, rho=args.rho, correlation=args.correlation, **dims
        )
    outputs = {"Y": "Y.csv"}
    emit_csv(sim.Y, out / "Y.csv")
    if sim.X is not None:
        outputs["X"] = "X.csv"
        outputs["theta_true"] = "theta_true.csv"
        write_matrix(out / "X.csv", sim.X, [f"x{j}" for j in range(sim.X.shape[1])])
        k = sim.theta_true.shape[1]
        write_matrix(
            out / "theta_true.csv",
            sim.theta_true,
            [f"a{j}" for j in range(k - 1)] + ["b"],
        )
    manifest = _manifest(args, outputs)
    manifest.update(
        {
            "scenario": sim.scenario,
            "seed": sim.seed,
            "orientation": sim.Y.orientation.value,
            "dims": {"d": sim.Y.series_length, "n": sim.Y.n_series},
            "config": sim.config,
        }
    )
    _dump(manifest, out / "manifest.json")
    return 0


def cmd_experiment(args):
    methods = args.methods.split(",") if args.methods else None
    if args.scenario and args.data:
        raise UsageError("give either --scenario or --data, not both")
    if args.scenario:
        doc = run_experiment(
            args.scenario,
            seed=args.seed,
            d=args.d,
            n=args.n,
            p=args.p,
            boundary=args.split,
            methods=methods,
            rho=args.rho,
            correlation=args.correlation,
        )
    elif args.data:
        if Orientation.parse(args.orientation) is not Orientation.ROWS:
            raise UsageError("dataset experiments need --orientation rows (one time step per row)")
        Y = _ingest(args.data, args)
        doc = run_dataset_experiment(
            Y,
            lags=2 if args.lags is None else args.lags,
            boundary=args.split,
            methods=methods,
            a=args.extended_a or 0.0,
            name=Path(args.data).stem,
        )
    else:
        raise UsageError("experiment needs --scenario or --data")
    if args.units:
        doc["units"] = args.units
    _dump(doc, args.out)
    if args.out not in (None, "-"):
        _dump(_manifest(args, {"report": Path(args.out).name}), _manifest_path(args.out))
    return 0


def _add_ingest_flags(p, required_orientation=True):
    p.add_argument(
        "--orientation",
        choices=[o.value for o in Orientation],
        required=required_orientation,
        help="columns: one series per column; rows: one series per row",
    )
    p.add_argument("--no-header", action="store_true", help="CSV files have no header row")
    p.add_argument("--time-column", help="name (or 0-based index) of a column to drop")


def _add_split(p):
    p.add_argument(
        "--split",
        type=int,
        help="number of leading observations used for training",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nslearn", description="Nash-Sutcliffe loss estimation and evaluation"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a regression model and write theta as JSON")
    p.add_argument("--data", required=True, help="response CSV")
    p.add_argument("--predictors", help="predictor CSV (n x p for rows, p x n for columns)")
    p.add_argument("--method", required=True, choices=REGRESSION_METHODS)
    p.add_argument("--lags", type=int, default=0, help="per-series lag order")
    p.add_argument("--extended-a", type=float, default=0.0, help="offset for nsreg-ext")
    p.add_argument("--out", help="fit file (default: stdout)")
    _add_ingest_flags(p)
    _add_split(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="apply a fit file to new data")
    p.add_argument("--fit", required=True)
    p.add_argument("--data", required=True, help="CSV supplying lags (with --lags)")
    p.add_argument("--predictors", help="predictor CSV")
    p.add_argument("--lags", type=int, help="defaults to the value stored in the fit file")
    p.add_argument("--out", required=True, help="prediction CSV")
    _add_ingest_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score predictions against observations")
    p.add_argument("--obs", required=True, help="observation CSV")
    p.add_argument("--pred", help="prediction CSV, same layout as --obs")
    p.add_argument("--fit", help="fit file; predictions are computed from --obs")
    p.add_argument("--predictors", help="predictor CSV (with --fit)")
    p.add_argument("--lags", type=int, help="defaults to the value stored in the fit file")
    p.add_argument("--method", help="method label stored in the report")
    p.add_argument("--extended-a", type=float, default=0.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--units", help="free-text units recorded in the report")
    p.add_argument("--out", help="report JSON (default: stdout)")
    _add_ingest_flags(p)
    p.add_argument(
        "--split",
        type=int,
        help="with --fit, score only the observations after this many",
    )
    p.set_defaults(func=cmd_eval)

    def sim_flags(p):
        p.add_argument("--d", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--p", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--rho", type=float, default=0.5, help="noise correlation")
        p.add_argument("--correlation", choices=["ar1", "exchangeable"], default="ar1")

    p = sub.add_parser("simulate", help="generate a simulated scenario")
    p.add_argument("--scenario", required=True, choices=SCENARIOS)
    p.add_argument("--out", help="output directory (default: current directory)")
    sim_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run a method comparison")
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--data", help="observed CSV, one time step per row")
    p.add_argument("--methods", help="comma-separated methods (regression comparisons)")
    p.add_argument("--method", dest="methods", help=argparse.SUPPRESS)
    p.add_argument("--lags", type=int, help="lag order for --data (default 2)")
    p.add_argument("--extended-a", type=float, default=0.0)
    p.add_argument("--units", help="free-text units recorded in the report")
    p.add_argument("--out", help="report JSON (default: stdout); a manifest is written beside it")
    _add_ingest_flags(p, required_orientation=False)
    _add_split(p)
    sim_flags(p)
    p.set_defaults(func=cmd_experiment, orientation="rows")
    return parser


def _thread_limit():
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if value < 0:
        raise UsageError(f"{THREADS_ENV} must be >= 0, got {value}")
    return value or None


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "methods", None):
        unknown = set(args.methods.split(",")) - set(REGRESSION_METHODS)
        if unknown:
            parser.error(f"unknown method(s): {', '.join(sorted(unknown))}")
    try:
        with threadpool_limits(limits=_thread_limit()):
            return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (NSLearnError, OSError, ValueError, KeyError) as exc:
        print(f"nslearn: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
