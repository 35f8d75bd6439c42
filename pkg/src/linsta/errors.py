"""Exception types raised across the package."""


class LinstaError(Exception):
    """Base class for all package errors."""


class DomainError(LinstaError, ValueError):
    """An argument lies outside the domain of an operation."""


class NumericalError(LinstaError, ArithmeticError):
    """A numerical procedure failed to converge or produced non-finite values."""


class DesignError(LinstaError):
    """A drive could not be designed for the requested problem."""


class IllConditionedError(DesignError):
    """The constraint system is too close to singular to solve reliably."""

    def __init__(self, message, pair=None, condition=None):
        super().__init__(message)
        self.pair = pair
        self.condition = condition


class InfeasibleError(DesignError):
    """The constraints cannot be satisfied simultaneously."""


class InconsistencyError(DesignError):
    """Constraints contradict a structural requirement (e.g. realness)."""
