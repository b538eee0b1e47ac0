"""
Exceptions raised by the dpols library
"""


class DpOlsError(Exception):
    """Base class for every library error"""


class SingularCovariance(DpOlsError):
    """The weighted covariance X^T W X is singular or too ill-conditioned"""

    def __init__(self, message: str, level: int = None):
        super().__init__(message)
        self.level = level


class DegenerateRemoval(DpOlsError):
    """Removing the point would make the covariance singular"""


class NotPositiveDefinite(DpOlsError):
    """A matrix expected to be symmetric positive definite is not"""


class BlockTooSmall(DpOlsError):
    """A partition of the sigma estimator has no more rows than columns"""


class EmptyBins(DpOlsError):
    """Every bin of a private histogram was suppressed"""


class InvalidParameter(DpOlsError, ValueError):
    """A parameter is outside its documented range"""


class PreconditionError(DpOlsError):
    """A certification suite refused to run"""


class DatasetParseError(DpOlsError):
    """A dataset file could not be parsed"""

    def __init__(self, message: str, line: int = None, column: int = None):
        location = ""
        if line is not None:
            location = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + location)
        self.line = line
        self.column = column
