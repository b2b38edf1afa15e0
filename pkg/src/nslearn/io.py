"""CSV ingestion/emission and lagged predictor construction."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .core import Orientation, Panel
from .exceptions import MissingFile, NonNumericCell, RaggedRows, ShapeMismatch, TooShort
from .regression import DesignMatrix

__all__ = [
    "IngestSpec",
    "ingest_csv",
    "read_matrix",
    "emit_csv",
    "write_matrix",
    "build_lag_design",
    "own_lag_columns",
]


@dataclass(frozen=True)
class IngestSpec:
    """How to read one response CSV.

    ``time_column`` names a column to drop (or gives its 0-based index when
    the file has no header). ``lags`` is consumed by :func:`build_lag_design`.
    """

    path: str
    orientation: Orientation = Orientation.ROWS
    has_header: bool = True
    time_column: str | None = None
    lags: int = 0

    def __post_init__(self):
        object.__setattr__(self, "orientation", Orientation.parse(self.orientation))
        if self.lags < 0:
            raise ValueError(f"lags must be >= 0, got {self.lags}")


def _parse_cell(text, row, col):
    try:
        value = float(text)
    except ValueError:
        raise NonNumericCell(
            f"non-numeric cell {text!r} at data row {row}, column {col}", row, col
        ) from None
    if not np.isfinite(value):
        raise NonNumericCell(
            f"missing or non-finite cell {text!r} at data row {row}, column {col}", row, col
        )
    return value


def read_matrix(path, has_header=True, time_column=None):
    """Read a numeric CSV body into ``(header, matrix)``.

    Row and column indices in error messages are 0-based positions in the
    data body (after the header) and in the original column list.
    """
    if not os.path.isfile(path):
        raise MissingFile(f"no such file: {path}")
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    header = None
    if has_header:
        if not rows:
            raise RaggedRows(f"{path} has no header row")
        header, rows = [h.strip() for h in rows[0]], rows[1:]
    if not rows:
        raise RaggedRows(f"{path} has no data rows")
    width = len(header) if header is not None else len(rows[0])
    drop = None
    if time_column is not None:
        if header is not None and time_column in header:
            drop = header.index(time_column)
        elif str(time_column).isdigit():
            drop = int(time_column)
        else:
            raise ShapeMismatch(f"time column {time_column!r} not found in {path}")
    data = []
    for i, row in enumerate(rows):
        if len(row) != width:
            raise RaggedRows(f"data row {i} has {len(row)} fields, expected {width}")
        data.append(
            [_parse_cell(cell.strip(), i, j) for j, cell in enumerate(row) if j != drop]
        )
    if header is not None and drop is not None:
        header = header[:drop] + header[drop + 1 :]
    return header, np.array(data, dtype=np.float64).reshape(len(data), -1)


def ingest_csv(spec):
    """Read a response panel; the file body is the raw matrix in ``spec.orientation``."""
    _, values = read_matrix(spec.path, spec.has_header, spec.time_column)
    return Panel(values, spec.orientation)


def write_matrix(path, values, header=None):
    """Write a matrix with shortest round-trip float formatting."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if header is not None:
            writer.writerow(header)
        for row in values:
            writer.writerow([repr(float(v)) for v in row])


def emit_csv(panel, path, header=True):
    """Write ``panel.values``; ``header=True`` writes ``s0, s1, ...`` names."""
    if header is True:
        header = [f"s{j}" for j in range(panel.values.shape[1])]
    elif header is False:
        header = None
    write_matrix(path, panel.values, header)


def build_lag_design(Y, lags):
    """Lagged predictors for a ``"rows"`` panel (rows are time steps).

    Columns are lag-major: all ``d`` columns of ``Y`` at lag 1, then all at
    lag 2, and so on, giving ``p = lags * d``. The first ``lags`` rows have
    incomplete history and are dropped from the responses.

    Returns
    -------
    (DesignMatrix, Panel)
    """
    if Y.orientation is not Orientation.ROWS:
        raise ShapeMismatch("lagged design needs a 'rows' panel (one time step per row)")
    lags = int(lags)
    if lags < 0:
        raise ValueError(f"lags must be >= 0, got {lags}")
    V = Y.values
    n, d = V.shape
    if n <= lags:
        raise TooShort(f"{n} time steps cannot supply {lags} lags")
    blocks = [V[lags - k : n - k] for k in range(1, lags + 1)]
    X = np.hstack(blocks) if blocks else np.empty((n, 0))
    return DesignMatrix(X, Orientation.ROWS), Panel(V[lags:], Orientation.ROWS)


def own_lag_columns(j, d, lags):
    """Indices of the lagged design columns that belong to column ``j``."""
    return [k * d + j for k in range(lags)]
