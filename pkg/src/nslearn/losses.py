"""Pointwise and realized losses: squared error, Euclidean norm, Nash-Sutcliffe.

Pointwise functions take plain vectors. Realized losses take two
:class:`~nslearn.core.Panel` objects of identical layout and average the
pointwise loss over series (columns for ``"columns"`` panels, rows for
``"rows"`` panels).

The Nash-Sutcliffe loss of a series is computed as the ratio
``sum((z - y)**2) / (sum((mean(y) - y)**2) + a)``. Using a true division
rather than ``weight * numerator`` keeps the climatology benchmark at exactly
1.0, which the skill scores rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Panel, as_vector
from .exceptions import DegenerateReference, DimensionTooSmall, ShapeMismatch, ZeroVariance

__all__ = [
    "Loss",
    "SE",
    "EN",
    "NS",
    "nse_ext",
    "VARIANCE_FLOOR",
    "loss_se",
    "loss_en",
    "ns_weight",
    "loss_ns",
    "loss_ns_extended",
    "nse",
    "series_weights",
    "series_losses",
    "realized_loss",
    "realized_nse",
    "skill_score",
]

#: Centered sums of squares below this are treated as exactly zero.
VARIANCE_FLOOR = 1e-300


@dataclass(frozen=True)
class Loss:
    """Loss selector for realized losses and skill scores.

    ``kind`` is one of ``"se"``, ``"en"``, ``"ns"`` or ``"nse_ext"``; ``a``
    is the denominator offset of the extended Nash-Sutcliffe loss.
    """

    kind: str
    a: float = 0.0

    def __post_init__(self):
        if self.kind not in ("se", "en", "ns", "nse_ext"):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if not np.isfinite(self.a) or self.a < 0:
            raise ValueError(f"offset a must be finite and >= 0, got {self.a}")
        if self.kind != "nse_ext" and self.a != 0:
            raise ValueError(f"offset a only applies to 'nse_ext', not {self.kind!r}")

    @classmethod
    def parse(cls, value):
        """Accept a :class:`Loss`, ``"ns"``, ``"nse_ext:0.5"`` and similar."""
        if isinstance(value, Loss):
            return value
        text = str(value).strip().lower()
        if ":" in text:
            kind, _, a = text.partition(":")
            return cls(kind, float(a))
        if text == "nse_ext":
            return cls("nse_ext", 0.0)
        return cls(text)

    @property
    def uses_weights(self):
        return self.kind in ("ns", "nse_ext")

    def __str__(self):
        return f"nse_ext:{self.a:g}" if self.kind == "nse_ext" else self.kind


SE = Loss("se")
EN = Loss("en")
NS = Loss("ns")


def nse_ext(a):
    return Loss("nse_ext", float(a))


def _pair(z, y):
    z = as_vector(z, "z")
    y = as_vector(y, "y")
    if z.shape != y.shape:
        raise ShapeMismatch(f"z has length {z.size} but y has length {y.size}")
    return z, y


def _centered_ss(y):
    if y.size < 2:
        raise DimensionTooSmall(f"Nash-Sutcliffe quantities need d >= 2, got d = {y.size}")
    return float(np.sum((np.mean(y) - y) ** 2))


def _denominator(y, a, series_index=None):
    ss = _centered_ss(y)
    denom = ss + a
    if denom < VARIANCE_FLOOR:
        where = "" if series_index is None else f" (series {series_index})"
        raise ZeroVariance(
            f"observed series is constant{where}; Nash-Sutcliffe weight undefined",
            series_index,
        )
    return denom


def loss_se(z, y):
    """Squared error of two scalars."""
    return (float(z) - float(y)) ** 2


def loss_en(z, y):
    """Squared Euclidean distance between two equal-length vectors."""
    z, y = _pair(z, y)
    return float(np.sum((z - y) ** 2))


def ns_weight(y, a=0.0):
    """Reciprocal of the centered sum of squares of ``y`` (plus ``a``).

    Raises
    ------
    ZeroVariance
        If ``y`` is constant and ``a == 0``.
    DimensionTooSmall
        If ``len(y) < 2``.
    """
    y = as_vector(y, "y")
    return 1.0 / _denominator(y, float(a))


def loss_ns(z, y):
    """Nash-Sutcliffe loss ``||z - y||^2 / ||mean(y) - y||^2``; equals ``1 - NSE``."""
    return loss_ns_extended(z, y, 0.0)


def loss_ns_extended(z, y, a):
    """Nash-Sutcliffe loss with ``a >= 0`` added to the denominator."""
    a = float(a)
    if not np.isfinite(a) or a < 0:
        raise ValueError(f"a must be finite and >= 0, got {a}")
    z, y = _pair(z, y)
    # weight times distance, so the decomposition holds as computed
    return (1.0 / _denominator(y, a)) * float(np.sum((z - y) ** 2))


def nse(z, y):
    """Nash-Sutcliffe efficiency of prediction ``z`` for observations ``y``."""
    return 1.0 - loss_ns(z, y)


def _panels(Z, Y):
    if not isinstance(Y, Panel):
        raise TypeError("Y must be a Panel")
    Y.check_compatible(Z, "Z")
    return np.ascontiguousarray(Z.series_matrix), np.ascontiguousarray(Y.series_matrix)


def _series_denominators(S, a):
    if S.shape[1] < 2:
        raise DimensionTooSmall(
            f"Nash-Sutcliffe quantities need series length >= 2, got {S.shape[1]}"
        )
    means = np.mean(S, axis=1)
    denom = np.sum((means[:, None] - S) ** 2, axis=1) + a
    bad = np.flatnonzero(denom < VARIANCE_FLOOR)
    if bad.size:
        raise ZeroVariance(
            f"constant series at indices {bad.tolist()}; Nash-Sutcliffe weight undefined",
            int(bad[0]),
        )
    return denom


def series_weights(Y, a=0.0):
    """Nash-Sutcliffe weight of every series of panel ``Y`` (length ``n``)."""
    a = float(a)
    if a < 0:
        raise ValueError(f"a must be >= 0, got {a}")
    return 1.0 / _series_denominators(np.ascontiguousarray(Y.series_matrix), a)


def series_losses(Z, Y, loss=NS):
    """Pointwise loss of every series, in ascending series order.

    For ``"se"`` the per-series value is the series mean squared error.
    """
    loss = Loss.parse(loss)
    Sz, Sy = _panels(Z, Y)
    sq = np.sum((Sz - Sy) ** 2, axis=1)
    if loss.kind == "en":
        return sq
    if loss.kind == "se":
        return sq / Sy.shape[1]
    return sq / _series_denominators(Sy, loss.a)


def realized_loss(Z, Y, loss=NS):
    """Average pointwise loss over the series of ``Y``.

    ``"se"`` averages over every entry (the mean squared error), which makes
    it independent of orientation. ``"en"`` averages the per-series squared
    Euclidean distance, so its value depends on which axis holds the series
    while the total sum of squares does not.
    """
    return float(np.mean(series_losses(Z, Y, loss)))


def realized_nse(Z, Y):
    """``1 - realized_loss(Z, Y, NS)``."""
    return 1.0 - realized_loss(Z, Y, NS)


def skill_score(Z, Y, Zref, loss=NS):
    """Relative improvement of ``Z`` over the reference ``Zref`` under ``loss``.

    ``1 - L(Z, Y) / L(Zref, Y)``. Equals 1 for perfect predictions and 0
    when ``Z`` is as good as the reference.
    """
    reference = realized_loss(Zref, Y, loss)
    if not reference > 0:
        raise DegenerateReference(
            f"reference realized loss is {reference}; skill score undefined"
        )
    return 1.0 - realized_loss(Z, Y, loss) / reference
