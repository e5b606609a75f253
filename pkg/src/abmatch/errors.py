"""Exception types shared across the toolkit."""


class AbmatchError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(AbmatchError, ValueError):
    """An argument violates a documented precondition."""


class SizeLimitError(InvalidInputError):
    """Input exceeds a hard size bound (e.g. factorial enumeration)."""


class NonConvergenceError(AbmatchError, RuntimeError):
    """An iterative solver hit its iteration cap.

    Carries the last observed optimality gap in ``gap``.
    """

    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class NumericFailureError(AbmatchError, RuntimeError):
    """A numeric routine failed; ``residual`` holds the offending quantity."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ParseError(AbmatchError, ValueError):
    """A data file could not be parsed; ``line_no`` is 1-based."""

    def __init__(self, message, line_no=None):
        super().__init__(message)
        self.line_no = line_no


class SchemaError(AbmatchError, ValueError):
    """A data file parsed but violates the dataset schema."""


class DegenerateFitError(AbmatchError, ValueError):
    """A fit was requested on data that cannot identify the parameters."""


class InvalidStateError(AbmatchError, RuntimeError):
    """An operation was called before its required state exists."""


class PoolExhausted(AbmatchError):
    """The unlabeled pool has no instances left to solicit."""
