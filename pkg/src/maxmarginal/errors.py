"""Exception hierarchy shared by every module of the package."""


class MaxMarginalError(ValueError):
    """Base class for all errors raised by :mod:`maxmarginal`."""


class InvalidData(MaxMarginalError):
    """Input contains NaN/Inf or cannot be interpreted as a real matrix."""


class SampleTooSmall(MaxMarginalError):
    """Fewer samples than an unbiased statistic needs (n >= 4)."""


class ShapeMismatch(MaxMarginalError):
    """Paired inputs disagree on the number of samples."""


class DegenerateSample(MaxMarginalError):
    """A sample (or a single column of it) has zero distance variance.

    ``columns`` holds the offending ``(i, j)`` grid cells, or ``(side, index)``
    labels when raised outside of a marginal grid.
    """

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class InvalidGrid(MaxMarginalError):
    """An aggregate was requested on an empty marginal grid."""


class InvalidParameter(MaxMarginalError):
    """A numeric or categorical parameter is outside its admissible range."""
