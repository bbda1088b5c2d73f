"""Exception types shared across the package."""


class PdmlabError(Exception):
    """Base class for all pdmlab errors."""


class DomainError(PdmlabError, ValueError):
    """Input lies outside the mathematical domain of an operation."""


class ValidationError(PdmlabError, ValueError):
    """A configuration value or argument failed validation."""


class IntegrationError(PdmlabError, RuntimeError):
    """A quadrature or ODE/trajectory integration failed.

    ``last_good`` holds the last abscissa (or time) that was integrated
    successfully, when known.
    """

    def __init__(self, message, last_good=None):
        super().__init__(message)
        self.last_good = last_good


class ConvergenceError(PdmlabError, RuntimeError):
    """An iterative solver failed to converge."""


class ConfinementError(DomainError):
    """The working domain is too small to confine the requested states."""
