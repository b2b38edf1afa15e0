"""scikit-learn compatible wrappers around the closed-form estimators.

All estimators follow the ``"rows"`` convention: ``X`` is ``(n_samples, p)``
and ``Y`` is ``(n_samples, d)``, so every sample is one weighted series of
length ``d``. ``score`` returns the realized Nash-Sutcliffe efficiency
(``1 - realized NS loss``) instead of R^2.

>>> import numpy as np
>>> from nslearn.estimators import NashSutcliffeRegression
>>> rng = np.random.default_rng(0)
>>> X = rng.normal(size=(50, 2))
>>> Y = X @ rng.normal(size=(2, 4)) + rng.normal(size=(50, 4))
>>> model = NashSutcliffeRegression().fit(X, Y)
>>> model.coef_.shape, model.intercept_.shape
((4, 2), (4,))
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .core import Orientation, Panel
from .exceptions import ShapeMismatch, TooShort
from .functionals import componentwise_mean_climatology, ns_climatology
from .losses import NS, nse_ext, realized_loss
from .regression import (
    augment,
    fit_multi_ols,
    fit_ns_regression,
    fit_per_component_ols,
    predict,
)

__all__ = [
    "OrdinaryLeastSquares",
    "NashSutcliffeRegression",
    "PerSeriesOLS",
    "ClimatologyRegressor",
    "LagFeatures",
]


def _check_Y(Y, n_samples):
    Y = check_array(Y, ensure_2d=False, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[0] != n_samples:
        raise ShapeMismatch(f"X has {n_samples} samples, Y has {Y.shape[0]}")
    return Y


class _LinearBase(RegressorMixin, BaseEstimator):
    """Shared fit/predict/score plumbing."""

    def _fit(self, X, Y):
        raise NotImplementedError

    def _ns_loss(self):
        return NS

    def fit(self, X, Y):
        X = check_array(X, dtype=np.float64, ensure_min_features=0)
        Y = _check_Y(Y, X.shape[0])
        panel = Panel(Y, Orientation.ROWS)
        self.fit_ = self._fit(augment(X, Orientation.ROWS), panel)
        self.n_features_in_ = X.shape[1]
        self.n_targets_ = Y.shape[1]
        self.coef_ = np.array(self.fit_.A)
        self.intercept_ = np.array(self.fit_.b)
        self.condition_estimate_ = self.fit_.condition_estimate
        return self

    def _check_X(self, X):
        check_is_fitted(self, "fit_")
        X = check_array(X, dtype=np.float64, ensure_min_features=0)
        if X.shape[1] != self.n_features_in_:
            raise ShapeMismatch(
                f"X has {X.shape[1]} features, estimator was fitted with {self.n_features_in_}"
            )
        return X

    def predict(self, X):
        X = self._check_X(X)
        return np.array(predict(self.fit_, augment(X, Orientation.ROWS)).values)

    def score(self, X, Y, sample_weight=None):
        """Realized Nash-Sutcliffe efficiency over the samples (rows) of ``Y``."""
        if sample_weight is not None:
            raise ValueError("sample_weight is not supported")
        X = self._check_X(X)
        Y = _check_Y(Y, X.shape[0])
        Z = Panel(self.predict(X), Orientation.ROWS)
        return 1.0 - realized_loss(Z, Panel(Y, Orientation.ROWS), self._ns_loss())


class OrdinaryLeastSquares(_LinearBase):
    """Multi-output ordinary least squares with intercept."""

    def _fit(self, X, Y):
        return fit_multi_ols(X, Y)


class NashSutcliffeRegression(_LinearBase):
    """Linear regression minimizing the realized Nash-Sutcliffe loss.

    Parameters
    ----------
    a : float, default 0
        Offset of the extended loss. ``a > 0`` allows constant target rows
        and makes ``score`` use the extended loss.

    Attributes
    ----------
    weights_ : ndarray of shape (n_samples,)
        Nash-Sutcliffe weight of every training sample.
    """

    def __init__(self, a=0.0):
        self.a = a

    def _fit(self, X, Y):
        fit = fit_ns_regression(X, Y, self.a)
        self.weights_ = np.array(fit.weights)
        return fit

    def _ns_loss(self):
        return NS if self.a == 0 else nse_ext(self.a)


class PerSeriesOLS(_LinearBase):
    """Independent least-squares fit for every target column.

    Parameters
    ----------
    feature_groups : list of list of int, optional
        ``feature_groups[i]`` are the feature columns target ``i`` may use;
        the remaining entries of ``coef_[i]`` are zero. ``None`` gives every
        target all features.
    """

    def __init__(self, feature_groups=None):
        self.feature_groups = feature_groups

    def _fit(self, X, Y):
        return fit_per_component_ols(X, Y, self.feature_groups)


class ClimatologyRegressor(RegressorMixin, BaseEstimator):
    """Constant prediction of the training climatology; ``X`` is ignored.

    Parameters
    ----------
    kind : {"nash_sutcliffe", "componentwise_mean"}
    a : float, default 0
        Extended-weight offset for ``kind="nash_sutcliffe"``.
    """

    def __init__(self, kind="nash_sutcliffe", a=0.0):
        self.kind = kind
        self.a = a

    def fit(self, X, Y):
        X = check_array(X, dtype=np.float64, ensure_min_features=0)
        panel = Panel(_check_Y(Y, X.shape[0]), Orientation.ROWS)
        if self.kind == "nash_sutcliffe":
            clim = ns_climatology(panel, self.a)
        elif self.kind == "componentwise_mean":
            clim = componentwise_mean_climatology(panel)
        else:
            raise ValueError(f"unknown climatology kind {self.kind!r}")
        self.climatology_ = np.array(clim.values)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "climatology_")
        X = check_array(X, dtype=np.float64, ensure_min_features=0)
        return np.tile(self.climatology_, (X.shape[0], 1))

    def score(self, X, Y, sample_weight=None):
        if sample_weight is not None:
            raise ValueError("sample_weight is not supported")
        Z = Panel(self.predict(X), Orientation.ROWS)
        Y = Panel(_check_Y(Y, Z.n_series), Orientation.ROWS)
        loss = NS if self.a == 0 else nse_ext(self.a)
        return 1.0 - realized_loss(Z, Y, loss)


class LagFeatures(TransformerMixin, BaseEstimator):
    """Lag-major lagged copies of a ``(time, series)`` matrix.

    ``transform`` returns ``(n - lags, lags * d)`` features: all series at
    lag 1, then all at lag 2, and so on. The row count shrinks, so pair it
    with :meth:`trim_target` rather than placing it inside a ``Pipeline``.
    """

    def __init__(self, lags=2):
        self.lags = lags

    def fit(self, Y, y=None):
        Y = check_array(Y, dtype=np.float64)
        if int(self.lags) < 0:
            raise ValueError(f"lags must be >= 0, got {self.lags}")
        self.n_features_in_ = Y.shape[1]
        return self

    def transform(self, Y):
        check_is_fitted(self, "n_features_in_")
        Y = check_array(Y, dtype=np.float64)
        n, lags = Y.shape[0], int(self.lags)
        if n <= lags:
            raise TooShort(f"{n} time steps cannot supply {lags} lags")
        if lags == 0:
            return np.empty((n, 0))
        return np.hstack([Y[lags - k : n - k] for k in range(1, lags + 1)])

    def trim_target(self, Y):
        """Drop the first ``lags`` rows so targets align with :meth:`transform`."""
        return np.asarray(Y)[int(self.lags) :]

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "n_features_in_")
        if input_features is None:
            input_features = [f"x{j}" for j in range(self.n_features_in_)]
        return np.array(
            [f"{name}_lag{k}" for k in range(1, int(self.lags) + 1) for name in input_features],
            dtype=object,
        )
