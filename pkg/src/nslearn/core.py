"""Orientation-aware panel container and the small vector primitives built on it.

A :class:`Panel` stores ``n`` series of common length ``d``. With
``Orientation.COLUMNS`` the raw matrix is ``d x n`` (one series per column);
with ``Orientation.ROWS`` it is ``n x d`` (one realization per row). Every
downstream formula is written against :attr:`Panel.series_matrix`, which is
always ``n x d`` regardless of orientation, so no caller ever has to remember
which axis is which.

All reductions go through numpy's pairwise summation along a fixed axis,
which is deterministic for a given shape and memory layout.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import EmptyInput, InvalidSplit, NonFiniteValue, ShapeMismatch

__all__ = [
    "Orientation",
    "Panel",
    "SplitSpec",
    "sample_mean",
    "center",
    "transpose_orientation",
    "split",
    "concat",
    "as_vector",
]


class Orientation(str, Enum):
    COLUMNS = "columns"
    ROWS = "rows"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(
                f"orientation must be 'columns' or 'rows', got {value!r}"
            ) from None

    def flipped(self):
        return Orientation.ROWS if self is Orientation.COLUMNS else Orientation.COLUMNS


def _nonfinite_coordinates(arr, limit=20):
    bad = np.argwhere(~np.isfinite(arr))
    return [tuple(int(i) for i in idx) for idx in bad[:limit]]


def as_vector(v, name="v"):
    """Convert ``v`` to a finite 1-D float64 array."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ShapeMismatch(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise EmptyInput(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        coords = _nonfinite_coordinates(arr)
        raise NonFiniteValue(f"{name} has non-finite entries at {coords}", coords)
    return arr


@dataclass(frozen=True, eq=False)
class Panel:
    """Rectangular matrix of real values tagged with its orientation.

    Parameters
    ----------
    values : array-like, 2-D
        Raw matrix, ``d x n`` for ``"columns"`` and ``n x d`` for ``"rows"``.
    orientation : Orientation or {"columns", "rows"}
    """

    values: np.ndarray
    orientation: Orientation = Orientation.COLUMNS

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim == 1:
            raise ShapeMismatch(
                "Panel values must be 2-D; reshape single series explicitly"
            )
        if arr.ndim != 2:
            raise ShapeMismatch(f"Panel values must be 2-D, got shape {arr.shape}")
        if arr.size == 0:
            raise EmptyInput("Panel has no entries")
        if not np.all(np.isfinite(arr)):
            coords = _nonfinite_coordinates(arr)
            raise NonFiniteValue(
                f"Panel contains non-finite entries at (row, col) {coords}", coords
            )
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "orientation", Orientation.parse(self.orientation))

    @classmethod
    def from_series(cls, series_matrix, orientation=Orientation.COLUMNS):
        """Build a panel from an ``n x d`` matrix holding one series per row."""
        orientation = Orientation.parse(orientation)
        s = np.asarray(series_matrix, dtype=np.float64)
        if s.ndim != 2:
            raise ShapeMismatch(f"series matrix must be 2-D, got shape {s.shape}")
        return cls(s.T if orientation is Orientation.COLUMNS else s, orientation)

    @property
    def series_matrix(self):
        """Read-only ``n x d`` view: row ``j`` is series ``j``."""
        if self.orientation is Orientation.COLUMNS:
            return self.values.T
        return self.values

    @property
    def n_series(self):
        return self.series_matrix.shape[0]

    @property
    def series_length(self):
        return self.series_matrix.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def series(self, j):
        return self.series_matrix[j]

    def same_layout(self, other):
        return self.orientation is other.orientation and self.shape == other.shape

    def check_compatible(self, other, name="other"):
        if not isinstance(other, Panel):
            raise TypeError(f"{name} must be a Panel, got {type(other).__name__}")
        if self.orientation is not other.orientation:
            raise ShapeMismatch(
                f"{name} has orientation {other.orientation.value!r}, "
                f"expected {self.orientation.value!r}"
            )
        if self.shape != other.shape:
            raise ShapeMismatch(f"{name} has shape {other.shape}, expected {self.shape}")

    def broadcast(self, vector):
        """Panel of this layout whose every series equals ``vector`` (length d)."""
        v = as_vector(vector, "vector")
        if v.size != self.series_length:
            raise ShapeMismatch(
                f"vector has length {v.size}, series length is {self.series_length}"
            )
        return Panel.from_series(np.tile(v, (self.n_series, 1)), self.orientation)

    def __eq__(self, other):
        if not isinstance(other, Panel):
            return NotImplemented
        return self.orientation is other.orientation and np.array_equal(
            self.values, other.values
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"Panel(n_series={self.n_series}, series_length={self.series_length}, "
            f"orientation={self.orientation.value!r})"
        )


@dataclass(frozen=True)
class SplitSpec:
    """Where to cut a panel.

    ``axis="series"`` partitions the set of series (a spatial
    hold-out); ``axis="time"`` cuts every series at the same time index.
    """

    boundary: int
    axis: str = "series"

    def __post_init__(self):
        if self.axis not in ("series", "time"):
            raise InvalidSplit(f"axis must be 'series' or 'time', got {self.axis!r}")
        if int(self.boundary) != self.boundary or self.boundary < 1:
            raise InvalidSplit(f"boundary must be a positive integer, got {self.boundary}")


def sample_mean(v):
    """Arithmetic mean of a nonempty finite vector."""
    return float(np.mean(as_vector(v)))


def center(v):
    """Return ``v`` minus its mean."""
    arr = as_vector(v)
    return arr - np.mean(arr)


def transpose_orientation(p):
    """Same data, raw matrix transposed and orientation tag flipped."""
    return Panel(p.values.T, p.orientation.flipped())


def _split_axis(p, axis):
    # raw-matrix axis that indexes series (or time) for this orientation
    series_axis = 1 if p.orientation is Orientation.COLUMNS else 0
    return series_axis if axis == "series" else 1 - series_axis


def split(p, spec):
    """Cut ``p`` in two at ``spec.boundary`` along the requested semantic axis."""
    raw_axis = _split_axis(p, spec.axis)
    extent = p.values.shape[raw_axis]
    if not 1 <= spec.boundary < extent:
        raise InvalidSplit(
            f"boundary {spec.boundary} outside [1, {extent - 1}] for axis {spec.axis!r}"
        )
    first, second = np.split(p.values, [spec.boundary], axis=raw_axis)
    return Panel(first, p.orientation), Panel(second, p.orientation)


def concat(a, b, axis="series"):
    """Inverse of :func:`split`."""
    if a.orientation is not b.orientation:
        raise ShapeMismatch("cannot concatenate panels of different orientation")
    raw_axis = _split_axis(a, axis)
    try:
        values = np.concatenate([a.values, b.values], axis=raw_axis)
    except ValueError as exc:
        raise ShapeMismatch(str(exc)) from None
    return Panel(values, a.orientation)
