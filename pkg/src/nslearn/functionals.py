"""Climatologies, identification functions and M-estimators.

A climatology is the constant prediction that minimizes a realized loss:

* component-wise mean climatology: mean of every time step across series
  (minimizes the realized Euclidean norm loss);
* Nash-Sutcliffe climatology: the same average weighted by each series'
  Nash-Sutcliffe weight (minimizes the realized Nash-Sutcliffe loss);
* per-series means: every series predicted by its own mean, which scores a
  realized Nash-Sutcliffe loss of exactly 1.

The closed forms are always used for estimation. :func:`numeric_minimize`
is an independent iterative minimizer kept for verifying them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import Panel, as_vector
from .exceptions import NoConvergence, ShapeMismatch
from .losses import Loss, ns_weight, realized_loss, series_weights

__all__ = [
    "Climatology",
    "componentwise_mean_climatology",
    "ns_climatology",
    "per_series_means",
    "per_series_means_panel",
    "identification_mean",
    "identification_ns",
    "empirical_identification",
    "m_estimate",
    "ConstantPredictionObjective",
    "numeric_minimize",
    "finite_difference_gradient",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Climatology:
    """Constant prediction vector of length ``d`` with the rule that produced it."""

    values: np.ndarray
    kind: str
    a: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def broadcast(self, like):
        """Prediction panel with the layout of ``like``."""
        return like.broadcast(self.values)


def componentwise_mean_climatology(Y):
    """Mean of each time step across series."""
    return Climatology(np.mean(Y.series_matrix, axis=0), "componentwise_mean")


def ns_climatology(Y, a=0.0):
    """Nash-Sutcliffe weighted mean of each time step across series.

    Parameters
    ----------
    Y : Panel
    a : float, default 0
        Offset of the extended Nash-Sutcliffe weight ``1 / (ss + a)``.
        ``a > 0`` tolerates constant series; ``a -> inf`` tends to the
        component-wise mean.
    """
    S = np.ascontiguousarray(Y.series_matrix)
    w = series_weights(Y, a)
    # rescaling cancels in the ratio and keeps products far from overflow
    w = w / np.max(w)
    values = np.sum(w[:, None] * S, axis=0) / np.sum(w)
    # the exact value is a convex combination; clamp away rounding overshoot
    values = np.clip(values, S.min(axis=0), S.max(axis=0))
    kind = "nash_sutcliffe" if a == 0 else "nash_sutcliffe_extended"
    return Climatology(values, kind, float(a))


def per_series_means(Y):
    """Mean of every series (length ``n``)."""
    return np.mean(Y.series_matrix, axis=1)


def per_series_means_panel(Y):
    """Prediction panel predicting each series by its own mean."""
    means = per_series_means(Y)
    S = np.repeat(means[:, None], Y.series_length, axis=1)
    return Panel.from_series(S, Y.orientation)


def identification_mean(z, y):
    """Component-wise mean identification ``z - y``."""
    z = as_vector(z, "z")
    y = as_vector(y, "y")
    if z.shape != y.shape:
        raise ShapeMismatch(f"z has length {z.size} but y has length {y.size}")
    return z - y


def identification_ns(z, y, a=0.0):
    """Nash-Sutcliffe identification ``(z - y) * w(y)``."""
    return identification_mean(z, y) * ns_weight(y, a)


def empirical_identification(Z, Y, kind="ns", a=0.0):
    """Series average of a pointwise identification function.

    Parameters
    ----------
    kind : {"ns", "mean_d", "mean"}
        ``"ns"`` and ``"mean_d"`` return a length-``d`` vector that vanishes
        at the Nash-Sutcliffe and component-wise mean climatologies.
        ``"mean"`` returns the mean error of each series separately
        (length ``n``), which vanishes at the per-series means.
    a : float
        Extended-weight offset, ``"ns"`` only.
    """
    Y.check_compatible(Z, "Z")
    R = np.ascontiguousarray(Z.series_matrix) - np.ascontiguousarray(Y.series_matrix)
    if kind == "mean_d":
        return np.mean(R, axis=0)
    if kind == "mean":
        return np.mean(R, axis=1)
    if kind == "ns":
        w = series_weights(Y, a)
        return np.mean(w[:, None] * R, axis=0)
    raise ValueError(f"unknown identification kind {kind!r}")


def m_estimate(Y, loss="ns"):
    """Constant-prediction M-estimate under ``loss`` via its closed form."""
    loss = Loss.parse(loss)
    if loss.kind in ("en", "se"):
        return componentwise_mean_climatology(Y)
    return ns_climatology(Y, loss.a)


class ConstantPredictionObjective:
    """Realized loss of the constant prediction ``theta`` as a function of ``theta``.

    The value is computed through :func:`nslearn.losses.realized_loss`; the
    gradient is the analytic ``(2/n) * sum_j w_j (theta - y_j)`` with
    ``w_j = 1`` for the Euclidean norm loss.
    """

    def __init__(self, Y, loss="ns"):
        self.Y = Y
        self.loss = Loss.parse(loss)
        if self.loss.kind not in ("en", "ns", "nse_ext"):
            raise ValueError("constant-prediction objective supports en, ns, nse_ext")
        self._S = np.ascontiguousarray(Y.series_matrix)
        if self.loss.uses_weights:
            self._w = series_weights(Y, self.loss.a)
        else:
            self._w = np.ones(Y.n_series)

    @property
    def size(self):
        return self.Y.series_length

    def value(self, theta):
        return realized_loss(self.Y.broadcast(theta), self.Y, self.loss)

    def gradient(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        n = self._S.shape[0]
        return (2.0 / n) * np.sum(self._w[:, None] * (theta[None, :] - self._S), axis=0)


def numeric_minimize(objective, start, tol=1e-8, max_iter=20000):
    """Minimize a smooth convex objective by nonlinear conjugate gradients.

    ``objective`` must expose ``value(x)`` and ``gradient(x)``. Step lengths
    come from a secant estimate of the curvature along the search direction
    (exact for quadratics) with an Armijo backtracking safeguard. Iteration
    stops once ``||gradient||_2 < tol``.

    Raises
    ------
    NoConvergence
        After ``max_iter`` iterations; ``last_iterate`` holds the final point.
    """
    x = np.array(start, dtype=np.float64).ravel()
    g = objective.gradient(x)
    fx = objective.value(x)
    direction = -g
    restart_every = max(x.size, 1)
    for it in range(max_iter):
        gnorm = float(np.linalg.norm(g))
        if gnorm < tol:
            logger.debug("numeric_minimize converged in %d iterations", it)
            return x
        slope = float(g @ direction)
        if slope >= 0:
            direction = -g
            slope = -gnorm**2
        curvature = float(direction @ (objective.gradient(x + direction) - g))
        step = -slope / curvature if curvature > 0 else 1.0
        while True:
            x_new = x + step * direction
            f_new = objective.value(x_new)
            if f_new <= fx + 1e-4 * step * slope or step < 1e-20:
                break
            step *= 0.5
        g_new = objective.gradient(x_new)
        if (it + 1) % restart_every == 0:
            beta = 0.0
        else:
            beta = max(0.0, float(g_new @ (g_new - g)) / float(g @ g))
        direction = -g_new + beta * direction
        x, g, fx = x_new, g_new, f_new
    raise NoConvergence(
        f"no convergence after {max_iter} iterations (|grad| = {np.linalg.norm(g):.3e})",
        last_iterate=x,
    )


def finite_difference_gradient(f, x, rel_step=1e-5):
    """Central-difference gradient with step ``rel_step * (1 + |x_i|)``."""
    x = np.array(x, dtype=np.float64).ravel()
    grad = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * (1.0 + abs(x[i]))
        up = x.copy()
        down = x.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (f(up) - f(down)) / (2.0 * h)
    return grad
