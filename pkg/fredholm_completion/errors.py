"""
Exceptions raised by fredholm_completion.

Every error derives from FredholmError so callers (the CLI in particular) can
catch library failures without swallowing built-in errors.
"""


class FredholmError(Exception):
    """Base class for all fredholm_completion errors."""


class BothInfinite(FredholmError, ArithmeticError):
    """Raised when INF - INF is requested; the index is undefined there."""


class UnsupportedPoint(FredholmError):
    """Raised when pointwise data cannot be decided exactly for an operator kind."""


class NotAvailable(FredholmError):
    """Raised when a kernel or cokernel basis is requested that does not exist.

    Either the range is not closed, or more vectors were asked for than the
    nullity / deficiency provides.
    """


class BadArity(FredholmError, ValueError):
    """Raised when fewer than two diagonal operators are given."""


class ArityMismatch(FredholmError, ValueError):
    """Raised when a corollary, target or file does not match the number of diagonals."""


class NotConstructible(FredholmError):
    """Raised when a completion is requested but the sufficient condition fails."""

    def __init__(self, msg, outcome=None):
        super().__init__(msg)
        self.outcome = outcome


class MissingCokernel(FredholmError):
    """Raised when the row chosen for the construction has finite deficiency."""


class ConsistencyViolation(FredholmError):
    """Raised when a grid point breaks a sandwich nesting assertion.

    The offending PointReport is kept on ``report``.
    """

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


class NumericalIllConditioned(FredholmError):
    """Raised when a truncation has no usable singular values."""


class ParseError(FredholmError, ValueError):
    """Raised for malformed problem files, descriptors, grids and scalars."""

    def __init__(self, msg, source=None):
        if source is not None:
            msg = f"{source}: {msg}"
        super().__init__(msg)
        self.source = source
