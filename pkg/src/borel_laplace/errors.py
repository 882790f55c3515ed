"""Exception types raised by the integrators and summation routines."""


class BorelLaplaceError(Exception):
    """Base class for all package errors."""


class NonFiniteCoefficient(BorelLaplaceError):
    """A Taylor coefficient generated by a recurrence is NaN or infinite."""


class DegenerateInput(BorelLaplaceError):
    """Every coefficient handed to the Padé solver is numerically zero."""


class ConvergenceFailure(BorelLaplaceError):
    """The eigenvalue solver behind a quadrature rule did not converge."""


class PoleOnRay(BorelLaplaceError):
    """A Padé denominator vanishes on the part of the positive real axis in use."""


class StepUnderflow(BorelLaplaceError):
    """No admissible step at least as large as ``dt_min`` could be found.

    ``t`` carries the time at which the integrator got stuck, when known.
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NewtonDivergence(BorelLaplaceError):
    """Implicit stage equations could not be solved."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class OutOfRange(BorelLaplaceError):
    """Dense output requested outside the integrated interval."""


class DomainError(BorelLaplaceError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ValidationError(BorelLaplaceError, ValueError):
    """Invalid configuration for a run or a sweep."""


class RunFailure(BorelLaplaceError):
    """A benchmark scenario failed; the message names the scenario."""
