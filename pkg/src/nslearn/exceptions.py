"""Exception hierarchy shared by every nslearn module."""


class NSLearnError(ValueError):
    """Base class for all errors raised by nslearn."""


class EmptyInput(NSLearnError):
    pass


class NonFiniteValue(NSLearnError):
    """Raised when a panel or vector contains NaN or infinite entries."""

    def __init__(self, message, coordinates=()):
        super().__init__(message)
        self.coordinates = list(coordinates)


class ShapeMismatch(NSLearnError):
    pass


class InvalidSplit(NSLearnError):
    pass


class DimensionTooSmall(NSLearnError):
    pass


class ZeroVariance(NSLearnError):
    """A series is constant, so its Nash-Sutcliffe weight is undefined."""

    def __init__(self, message, series_index=None):
        super().__init__(message)
        self.series_index = series_index


class DegenerateReference(NSLearnError):
    pass


class NoConvergence(NSLearnError):
    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class RankDeficient(NSLearnError):
    def __init__(self, message, condition_estimate=float("inf")):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class InvalidCovariance(NSLearnError):
    pass


class RejectionTooAggressive(NSLearnError):
    def __init__(self, message, acceptance_rate=0.0):
        super().__init__(message)
        self.acceptance_rate = acceptance_rate


class IngestError(NSLearnError):
    pass


class MissingFile(IngestError):
    pass


class RaggedRows(IngestError):
    pass


class NonNumericCell(IngestError):
    def __init__(self, message, row, col):
        super().__init__(message)
        self.row = row
        self.col = col


class TooShort(NSLearnError):
    pass

