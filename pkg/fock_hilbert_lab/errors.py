"""
Exception hierarchy for the Fock-space laboratory.

Every error carries the name of the module operation that raised it so the CLI
can report "radial_measure.moment: ..." style messages and map the error class
onto an exit status.
"""

from __future__ import annotations


class FockLabError(Exception):
    """Base class for all library errors."""

    def __init__(self, operation: str, message: str):
        self.operation = operation
        self.message = message
        super().__init__(f"{operation}: {message}")

    def __reduce__(self):
        # errors raised in scan worker processes must survive the trip back
        return (self.__class__, (self.operation, self.message))


class DomainError(FockLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigError(FockLabError, ValueError):
    """A run configuration could not be parsed or validated."""


class NumericalOverflowError(FockLabError, OverflowError):
    """A quantity exceeds the double-precision range even in log domain."""


class MissingMomentError(FockLabError, KeyError):
    """A moment table does not cover the requested index."""

    def __str__(self) -> str:
        return f"{self.operation}: {self.message}"


class FinitenessError(FockLabError, ValueError):
    """A measure that must be finite has (numerically) infinite mass."""


class NonConvergenceError(FockLabError, RuntimeError):
    """An iterative method hit its iteration cap."""


class QuadratureError(NonConvergenceError):
    """Adaptive quadrature did not reach its tolerance within the panel budget."""


class ToleranceUnreachableError(NonConvergenceError):
    """A series truncation would exceed the configured term cap."""


class BoundViolation(FockLabError, AssertionError):
    """A verification report contains at least one violated bound."""
