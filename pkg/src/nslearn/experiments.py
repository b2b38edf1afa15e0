"""End-to-end comparison runs and the JSON documents they produce.

Two document types are emitted:

``ns-report/1``
    Evaluation of one prediction panel against observations.
``ns-comparison/1``
    Several estimators fitted and scored side by side, laid out like the
    comparison tables (one block per data split, one entry per method).

Neither document carries a timestamp, so a rerun with the same inputs is
byte-identical; run metadata with wall-clock times lives in a separate
manifest written by the CLI.
"""

from __future__ import annotations

from .core import Orientation, SplitSpec, split
from .exceptions import InvalidSplit
from .functionals import (
    componentwise_mean_climatology,
    empirical_identification,
    ns_climatology,
    per_series_means_panel,
)
from .io import build_lag_design, own_lag_columns
from .losses import EN, NS, nse_ext, realized_loss
from .regression import (
    DesignMatrix,
    augment,
    fit_multi_ols,
    fit_ns_regression,
    fit_per_component_ols,
    predict,
)
from .simulate import EXP1_SCENARIOS, REGRESSION_SCENARIOS, generate_exp1, generate_exp_regression

__all__ = [
    "REPORT_SCHEMA",
    "COMPARISON_SCHEMA",
    "REPORT_JSON_SCHEMA",
    "COMPARISON_JSON_SCHEMA",
    "evaluation_report",
    "compare_climatologies",
    "fit_method",
    "compare_regressions",
    "run_experiment",
    "run_dataset_experiment",
    "REGRESSION_METHODS",
    "CLIMATOLOGY_METHODS",
]

REPORT_SCHEMA = "ns-report/1"
COMPARISON_SCHEMA = "ns-comparison/1"

CLIMATOLOGY_METHODS = ("componentwise_mean", "nash_sutcliffe", "series_means")
REGRESSION_METHODS = ("ols1d", "multiols", "nsreg", "nsreg-ext")

_scores = {
    "type": "object",
    "required": ["realized_en", "realized_ns", "realized_nse"],
    "properties": {
        "realized_en": {"type": "number", "minimum": 0},
        "realized_ns": {"type": "number", "minimum": 0},
        "realized_nse": {"type": "number", "maximum": 1},
    },
}

REPORT_JSON_SCHEMA = {
    "type": "object",
    "required": [
        "schema",
        "method",
        "orientation",
        "loss",
        "realized_en",
        "realized_ns",
        "realized_nse",
        "skill_vs_series_means",
        "identification_ns",
        "dims",
    ],
    "properties": {
        "schema": {"const": REPORT_SCHEMA},
        "method": {"type": "string"},
        "orientation": {"enum": ["columns", "rows"]},
        "loss": {"type": "string"},
        "realized_en": {"type": "number", "minimum": 0},
        "realized_ns": {"type": "number", "minimum": 0},
        "realized_nse": {"type": "number", "maximum": 1},
        "skill_vs_series_means": {"type": "number", "maximum": 1},
        "identification_ns": {"type": "array", "items": {"type": "number"}},
        "dims": {
            "type": "object",
            "required": ["d", "n", "p"],
            "properties": {
                "d": {"type": "integer", "minimum": 1},
                "n": {"type": "integer", "minimum": 1},
                "p": {"type": ["integer", "null"], "minimum": 0},
            },
        },
        "seed": {"type": ["integer", "null"]},
        "units": {"type": ["string", "null"]},
    },
}

COMPARISON_JSON_SCHEMA = {
    "type": "object",
    "required": ["schema", "experiment", "orientation", "dims", "methods", "blocks"],
    "properties": {
        "schema": {"const": COMPARISON_SCHEMA},
        "experiment": {"type": "string"},
        "orientation": {"enum": ["columns", "rows"]},
        "seed": {"type": ["integer", "null"]},
        "dims": {"type": "object"},
        "methods": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "blocks": {
            "type": "object",
            "minProperties": 1,
            "additionalProperties": {
                "type": "object",
                "additionalProperties": _scores,
            },
        },
        "best": {"type": "object"},
    },
}


def _scores_for(Z, Y):
    ns = realized_loss(Z, Y, NS)
    return {
        "realized_en": realized_loss(Z, Y, EN),
        "realized_ns": ns,
        "realized_nse": 1.0 - ns,
    }


def evaluation_report(Z, Y, method="predictions", a=0.0, p=None, seed=None, units=None):
    """Score one prediction panel; returns an ``ns-report/1`` dictionary.

    With ``a > 0`` the Nash-Sutcliffe quantities use the extended loss, so
    constant observed series are tolerated.
    """
    ns_loss = NS if a == 0 else nse_ext(a)
    realized_ns = realized_loss(Z, Y, ns_loss)
    reference = realized_loss(per_series_means_panel(Y), Y, ns_loss)
    return {
        "schema": REPORT_SCHEMA,
        "method": method,
        "orientation": Y.orientation.value,
        "loss": str(ns_loss),
        "realized_en": realized_loss(Z, Y, EN),
        "realized_ns": realized_ns,
        "realized_nse": 1.0 - realized_ns,
        "skill_vs_series_means": 1.0 - realized_ns / reference,
        "identification_ns": empirical_identification(Z, Y, "ns", a).tolist(),
        "dims": {"d": Y.series_length, "n": Y.n_series, "p": p},
        "seed": seed,
        "units": units,
    }


def _best(blocks):
    best = {}
    for name, block in blocks.items():
        best[name] = {
            "realized_en": min(block, key=lambda m: block[m]["realized_en"]),
            "realized_ns": min(block, key=lambda m: block[m]["realized_ns"]),
        }
    return best


def compare_climatologies(Y):
    """Realized losses of the three constant predictions on panel ``Y``."""
    predictions = {
        "componentwise_mean": componentwise_mean_climatology(Y).broadcast(Y),
        "nash_sutcliffe": ns_climatology(Y).broadcast(Y),
        "series_means": per_series_means_panel(Y),
    }
    return {name: _scores_for(Z, Y) for name, Z in predictions.items()}


def fit_method(method, X, Y, a=0.0, feature_groups=None):
    """Dispatch a method name to its estimator."""
    if method == "ols1d":
        return fit_per_component_ols(X, Y, feature_groups)
    if method == "multiols":
        return fit_multi_ols(X, Y)
    if method == "nsreg":
        return fit_ns_regression(X, Y)
    if method == "nsreg-ext":
        return fit_ns_regression(X, Y, a)
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(REGRESSION_METHODS)}")


def compare_regressions(X_train, Y_train, X_test, Y_test, methods, a=0.0, feature_groups=None):
    """Fit every method on the training block, score on both blocks."""
    blocks = {"train": {}, "test": {}}
    for method in methods:
        fit = fit_method(method, X_train, Y_train, a, feature_groups)
        blocks["train"][method] = _scores_for(predict(fit, X_train), Y_train)
        blocks["test"][method] = _scores_for(predict(fit, X_test), Y_test)
    return blocks


def _split_design(X, orientation, boundary):
    P = augment(X, orientation).predictors
    return DesignMatrix(P[:boundary], orientation), DesignMatrix(P[boundary:], orientation)


def run_experiment(
    scenario,
    seed=0,
    d=None,
    n=None,
    p=None,
    boundary=None,
    methods=None,
    rho=0.5,
    correlation="ar1",
):
    """Generate a simulated scenario and return its ``ns-comparison/1`` document."""
    scenario = scenario.lower()
    if scenario in EXP1_SCENARIOS:
        kwargs = {k: v for k, v in (("d", d), ("n", n)) if v is not None}
        out = generate_exp1(scenario, seed=seed, rho=rho, correlation=correlation, **kwargs)
        Y = out.Y
        blocks = {"all": compare_climatologies(Y)}
        return {
            "schema": COMPARISON_SCHEMA,
            "experiment": scenario,
            "orientation": Y.orientation.value,
            "seed": seed,
            "dims": {"d": Y.series_length, "n": Y.n_series},
            "config": out.config,
            "methods": list(CLIMATOLOGY_METHODS),
            "blocks": blocks,
            "best": _best(blocks),
        }
    if scenario in REGRESSION_SCENARIOS:
        kwargs = {k: v for k, v in (("d", d), ("n", n), ("p", p)) if v is not None}
        out = generate_exp_regression(
            scenario, seed=seed, rho=rho, correlation=correlation, **kwargs
        )
        Y = out.Y
        boundary = Y.n_series // 2 if boundary is None else int(boundary)
        methods = list(methods or ("multiols", "nsreg"))
        Y_train, Y_test = split(Y, SplitSpec(boundary, "series"))
        X_train, X_test = _split_design(out.X, Y.orientation, boundary)
        blocks = compare_regressions(X_train, Y_train, X_test, Y_test, methods)
        return {
            "schema": COMPARISON_SCHEMA,
            "experiment": scenario,
            "orientation": Y.orientation.value,
            "seed": seed,
            "dims": {
                "d": Y.series_length,
                "n": Y.n_series,
                "p": X_train.p,
                "n_train": Y_train.n_series,
                "n_test": Y_test.n_series,
            },
            "config": out.config,
            "methods": methods,
            "blocks": blocks,
            "best": _best(blocks),
        }
    raise ValueError(f"unknown scenario {scenario!r}")


def run_dataset_experiment(Y, lags=2, boundary=None, methods=None, a=0.0, name="dataset"):
    """Lagged-regression comparison on an observed ``"rows"`` panel.

    Each row is a time step and each column a series. ``ols1d`` fits every
    column on its own lags only; the other methods use all lagged columns.
    The first ``boundary`` complete observations form the training block.
    """
    design, Y_resp = build_lag_design(Y, lags)
    n = Y_resp.n_series
    boundary = n // 2 if boundary is None else int(boundary)
    if not 1 <= boundary < n:
        raise InvalidSplit(f"split boundary {boundary} outside [1, {n - 1}]")
    d = Y_resp.series_length
    groups = [own_lag_columns(j, d, lags) for j in range(d)]
    methods = list(methods or ("ols1d", "multiols", "nsreg"))
    Y_train, Y_test = split(Y_resp, SplitSpec(boundary, "series"))
    P = design.predictors
    X_train = DesignMatrix(P[:boundary], Orientation.ROWS)
    X_test = DesignMatrix(P[boundary:], Orientation.ROWS)
    blocks = compare_regressions(X_train, Y_train, X_test, Y_test, methods, a, groups)
    return {
        "schema": COMPARISON_SCHEMA,
        "experiment": name,
        "orientation": Orientation.ROWS.value,
        "seed": None,
        "dims": {"d": d, "n": n, "p": design.p, "lags": lags, "n_train": boundary,
                 "n_test": n - boundary},
        "methods": methods,
        "blocks": blocks,
        "best": _best(blocks),
    }
