"""Exception hierarchy shared by every module.

The CLI maps ``InvalidInputError`` to exit code 2 and ``InfeasibleBoundError``
to exit code 3.
"""


class SparseHopError(Exception):
    pass


class InvalidInputError(SparseHopError, ValueError):
    """Non-finite, malformed, or off-domain input."""


class EmptyInputError(InvalidInputError):
    pass


class InvalidParameterError(InvalidInputError):
    pass


class ShapeError(InvalidInputError):
    pass


class DegeneratePointError(InvalidInputError):
    """Finite differences requested too close to a support change."""


class DomainError(InvalidInputError):
    pass


class PreconditionError(InvalidInputError):
    """A theorem precondition does not hold for the given query."""

    def __init__(self, message, nearest=None):
        super().__init__(message)
        self.nearest = nearest


class ParseError(InvalidInputError):
    def __init__(self, message, row=None, col=None):
        loc = ""
        if row is not None:
            loc = f" (row {row}" + (f", col {col})" if col is not None else ")")
        super().__init__(message + loc)
        self.row = row
        self.col = col


class InfeasibleBoundError(SparseHopError):
    pass


class NoConvergenceError(SparseHopError):
    pass


class ConsistencyError(SparseHopError, RuntimeError):
    """Raised when an invariant that theory guarantees is broken numerically."""
