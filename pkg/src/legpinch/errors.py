"""Exception types shared across the package."""


class LegpinchError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(LegpinchError, ValueError):
    """Operation not defined for this tensor/vector dimension."""


class TraceError(LegpinchError, ValueError):
    """A slice trace exceeds the traceless gate tolerance."""

    def __init__(self, message: str, slice_index: int | None = None):
        super().__init__(message)
        self.slice_index = slice_index


class DomainError(LegpinchError, ValueError):
    """Input outside the domain on which the quantity is asserted."""


class ConvergenceError(LegpinchError, RuntimeError):
    """Iterative solver failed to meet its tolerance; carries the best iterate."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class DegenerateChartError(LegpinchError, RuntimeError):
    """Induced metric is numerically singular at the requested point."""


class LegendrianViolation(LegpinchError, RuntimeError):
    """Jet fails the Legendrian gate required by the operation."""


class ConsistencyError(LegpinchError, ArithmeticError):
    """An internal algebraic identity failed beyond tolerance."""
