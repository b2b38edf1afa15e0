"""Closed-form linear regression: ordinary least squares and Nash-Sutcliffe WLS.

Both orientations share one algorithm. Whatever the layout of the response
panel, its :attr:`~nslearn.core.Panel.series_matrix` is ``n x d`` with one
observation (series) per row, and the augmented design is ``n x (p+1)``
with the ones column last. The parameter matrix ``theta = [A | b]`` is
``d x (p+1)``.

Nash-Sutcliffe regression is weighted least squares with one weight per
observation, the reciprocal of that observation's centered sum of squares.
Systems are solved by a QR factorization of the row-scaled design, never by
forming an explicit inverse.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla

from .core import Orientation, Panel, as_vector
from .exceptions import DimensionTooSmall, RankDeficient, ShapeMismatch
from .losses import Loss, VARIANCE_FLOOR, realized_loss, series_weights

__all__ = [
    "RANK_TOLERANCE",
    "DesignMatrix",
    "FitResult",
    "augment",
    "fit_ols_1d",
    "fit_multi_ols",
    "fit_per_component_ols",
    "fit_ns_regression",
    "fit_forecast_model_with_columnwise_ns",
    "predict",
    "RegressionObjective",
]

#: Smallest singular value allowed relative to the largest one.
RANK_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Predictors stored observation-major (``n x p``) plus the augmented form."""

    predictors: np.ndarray
    orientation: Orientation = Orientation.ROWS

    def __post_init__(self):
        X = np.array(self.predictors, dtype=np.float64)
        if X.ndim != 2:
            raise ShapeMismatch(f"predictors must be 2-D, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("predictor matrix contains non-finite values")
        X.setflags(write=False)
        object.__setattr__(self, "predictors", X)
        object.__setattr__(self, "orientation", Orientation.parse(self.orientation))

    @property
    def n_obs(self):
        return self.predictors.shape[0]

    @property
    def p(self):
        return self.predictors.shape[1]

    @property
    def augmented(self):
        return np.hstack([self.predictors, np.ones((self.n_obs, 1))])

    @property
    def raw(self):
        """Predictors in the caller's orientation (``p x n`` for columns)."""
        if self.orientation is Orientation.COLUMNS:
            return self.predictors.T
        return self.predictors


def augment(X, orientation=Orientation.ROWS, n_obs=None):
    """Wrap a predictor matrix and append the intercept column.

    ``X`` is ``n x p`` for ``"rows"`` and ``p x n`` for ``"columns"``. Pass
    ``X=None`` together with ``n_obs`` for an intercept-only design.
    """
    orientation = Orientation.parse(orientation)
    if isinstance(X, DesignMatrix):
        return X
    if X is None:
        if n_obs is None:
            raise ValueError("n_obs is required when X is None")
        return DesignMatrix(np.empty((int(n_obs), 0)), orientation)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None] if orientation is Orientation.ROWS else X[None, :]
    if orientation is Orientation.COLUMNS:
        X = X.T
    return DesignMatrix(X, orientation)


@dataclass(frozen=True, eq=False)
class FitResult:
    """Estimated ``theta = [A | b]`` with fit diagnostics."""

    theta: np.ndarray
    method: str
    orientation: Orientation
    condition_estimate: float
    a: float = 0.0
    weights: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        theta = np.array(self.theta, dtype=np.float64)
        if theta.ndim != 2:
            raise ShapeMismatch(f"theta must be 2-D, got shape {theta.shape}")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "orientation", Orientation.parse(self.orientation))

    @property
    def A(self):
        return self.theta[:, :-1]

    @property
    def b(self):
        return self.theta[:, -1]

    @property
    def d(self):
        return self.theta.shape[0]

    @property
    def p(self):
        return self.theta.shape[1] - 1

    def to_dict(self):
        return {
            "method": self.method,
            "orientation": self.orientation.value,
            "d": self.d,
            "p": self.p,
            "a": self.a,
            "condition_estimate": self.condition_estimate,
            "theta": self.theta.tolist(),
        }

    @classmethod
    def from_dict(cls, doc):
        theta = np.asarray(doc["theta"], dtype=np.float64)
        if theta.shape != (doc["d"], doc["p"] + 1):
            raise ShapeMismatch(
                f"theta has shape {theta.shape}, header says d={doc['d']}, p={doc['p']}"
            )
        return cls(
            theta,
            doc["method"],
            Orientation.parse(doc["orientation"]),
            float(doc["condition_estimate"]),
            float(doc.get("a", 0.0)),
        )


def _solve(Xt, S, w=None):
    """Least-squares ``theta`` (``d x (p+1)``) for rows of ``S`` on rows of ``Xt``."""
    n, k = Xt.shape
    if n < k:
        raise RankDeficient(
            f"{n} observations cannot identify {k} coefficients", float("inf")
        )
    if w is None:
        M, R = Xt, S
    else:
        # relative weights give the same solution and keep sqrt well scaled
        sw = np.sqrt(w / np.max(w))
        M, R = sw[:, None] * Xt, sw[:, None] * S
    sv = np.linalg.svd(M, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    if not sv[-1] > RANK_TOLERANCE * sv[0]:
        raise RankDeficient(
            f"augmented design is rank deficient (condition estimate {cond:.3e})", cond
        )
    Q, U = np.linalg.qr(M)
    coef = sla.solve_triangular(U, Q.T @ R)
    return coef.T, cond


def _design_for(X, orientation, n_obs):
    design = augment(X, orientation, n_obs)
    if design.n_obs != n_obs:
        raise ShapeMismatch(
            f"design has {design.n_obs} observations, responses have {n_obs}"
        )
    return design


def fit_ols_1d(X, y, orientation=Orientation.ROWS):
    """Ordinary least squares for a single response vector.

    Returns a :class:`FitResult` whose ``theta`` is ``1 x (p+1)``.
    """
    y = as_vector(y, "y")
    design = _design_for(X, orientation, y.size)
    theta, cond = _solve(design.augmented, y[:, None])
    return FitResult(theta, "ols1d", design.orientation, cond)


def fit_multi_ols(X, Y):
    """Multi-output least squares; row ``i`` of ``theta`` is the 1-D fit of component ``i``."""
    S = np.ascontiguousarray(Y.series_matrix)
    design = _design_for(X, Y.orientation, S.shape[0])
    theta, cond = _solve(design.augmented, S)
    return FitResult(theta, "multiols", Y.orientation, cond)


def fit_per_component_ols(X, Y, feature_groups=None):
    """Separate 1-D least-squares fit for every response component.

    ``feature_groups[i]`` lists the predictor columns component ``i`` may use
    (for instance its own lags); other slopes of that row of ``theta`` are
    fixed at zero. Without groups every component uses all predictors, which
    reproduces :func:`fit_multi_ols`.
    """
    S = np.ascontiguousarray(Y.series_matrix)
    design = _design_for(X, Y.orientation, S.shape[0])
    d, p = S.shape[1], design.p
    if feature_groups is None:
        feature_groups = [list(range(p))] * d
    if len(feature_groups) != d:
        raise ShapeMismatch(f"{len(feature_groups)} feature groups for {d} components")
    theta = np.zeros((d, p + 1))
    cond = 0.0
    for i, cols in enumerate(feature_groups):
        cols = [int(c) for c in cols]
        fit = fit_ols_1d(design.predictors[:, cols], S[:, i], Orientation.ROWS)
        theta[i, cols] = fit.A[0]
        theta[i, -1] = fit.b[0]
        cond = max(cond, fit.condition_estimate)
    return FitResult(theta, "ols1d", Y.orientation, cond)


def fit_ns_regression(X, Y, a=0.0):
    """Nash-Sutcliffe linear regression (weighted least squares).

    Each observation (series) ``j`` gets weight ``1 / (ss_j + a)`` with
    ``ss_j`` its centered sum of squares. The weights are frozen from ``Y``
    before solving and returned in ``FitResult.weights``.

    Raises
    ------
    DimensionTooSmall
        If the responses have fewer than two components.
    ZeroVariance
        If a response series is constant and ``a == 0``.
    RankDeficient
        If the augmented design does not have full column rank.
    """
    if Y.series_length < 2:
        raise DimensionTooSmall(
            f"Nash-Sutcliffe regression needs d >= 2, got d = {Y.series_length}"
        )
    S = np.ascontiguousarray(Y.series_matrix)
    design = _design_for(X, Y.orientation, S.shape[0])
    w = series_weights(Y, a)
    theta, cond = _solve(design.augmented, S, w)
    method = "nsreg" if a == 0 else "nsreg-ext"
    return FitResult(theta, method, Y.orientation, cond, float(a), w)


def fit_forecast_model_with_columnwise_ns(X, Y):
    """Fit the row-oriented model by minimizing the column-wise Nash-Sutcliffe loss.

    With ``Y`` of shape ``n x d`` the loss is the mean over the ``d`` columns
    of each column's Nash-Sutcliffe loss. Every column's weight multiplies
    only that column's squared residual norm, so the problem splits into
    ``d`` independent weighted fits whose minimizers ignore the weight. The
    result therefore coincides with :func:`fit_multi_ols`.

    Each column is solved separately through the Cholesky factor of its own
    weighted normal equations. A constant column has an undefined weight;
    it is given weight 1, which does not move its minimizer.
    """
    if Y.orientation is not Orientation.ROWS:
        raise ShapeMismatch("columnwise Nash-Sutcliffe fit expects a 'rows' panel")
    S = np.asarray(Y.values)
    design = _design_for(X, Y.orientation, S.shape[0])
    Xt = design.augmented
    gram = Xt.T @ Xt
    sv = np.linalg.svd(Xt, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    if Xt.shape[0] < Xt.shape[1] or not sv[-1] > RANK_TOLERANCE * sv[0]:
        raise RankDeficient(
            f"augmented design is rank deficient (condition estimate {cond:.3e})", cond
        )
    theta = np.empty((S.shape[1], Xt.shape[1]))
    for j in range(S.shape[1]):
        col = S[:, j]
        ss = float(np.sum((np.mean(col) - col) ** 2))
        wj = 1.0 / ss if ss >= VARIANCE_FLOOR else 1.0
        factor = sla.cho_factor(wj * gram)
        theta[j] = sla.cho_solve(factor, wj * (Xt.T @ col))
    return FitResult(theta, "columnwise-ns", Orientation.ROWS, cond)


def predict(fit, X):
    """Prediction panel ``X_aug @ theta.T`` in the fit's orientation."""
    if isinstance(X, DesignMatrix):
        design = X
    elif X is None:
        raise ValueError("X is required; use an (n, 0) array for intercept-only fits")
    else:
        design = augment(X, fit.orientation)
    if design.p != fit.p:
        raise ShapeMismatch(f"design has {design.p} predictors, fit expects {fit.p}")
    Z = design.augmented @ fit.theta.T
    return Panel.from_series(Z, fit.orientation)


class RegressionObjective:
    """Realized loss of the linear model as a function of ``vec(theta)``.

    ``value`` evaluates :func:`nslearn.losses.realized_loss` on the model's
    predictions. ``gradient`` is the analytic
    ``(2/n) * sum_j w_j (theta x_j - y_j) x_j^T`` flattened row-major.
    """

    def __init__(self, X, Y, loss="ns"):
        self.Y = Y
        self.loss = Loss.parse(loss)
        if self.loss.kind not in ("en", "ns", "nse_ext"):
            raise ValueError("regression objective supports en, ns, nse_ext")
        self._S = np.ascontiguousarray(Y.series_matrix)
        self.design = _design_for(X, Y.orientation, self._S.shape[0])
        self._Xt = self.design.augmented
        if self.loss.uses_weights:
            self._w = series_weights(Y, self.loss.a)
        else:
            self._w = np.ones(self._S.shape[0])
        self.shape = (self._S.shape[1], self._Xt.shape[1])

    @property
    def size(self):
        return self.shape[0] * self.shape[1]

    def _theta(self, vec):
        return np.asarray(vec, dtype=np.float64).reshape(self.shape)

    def value(self, vec):
        Z = Panel.from_series(self._Xt @ self._theta(vec).T, self.Y.orientation)
        return realized_loss(Z, self.Y, self.loss)

    def gradient(self, vec):
        resid = self._Xt @ self._theta(vec).T - self._S
        n = self._S.shape[0]
        return ((2.0 / n) * (self._w[:, None] * resid).T @ self._Xt).ravel()
