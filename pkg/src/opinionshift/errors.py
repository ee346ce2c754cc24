"""Exception hierarchy.

Validation failures (bad arguments, unsupported family pairs) derive from
``ValidationError`` and map to CLI exit code 2; numerical failures
(quadrature budget exhausted, non-converged iteration) derive from
``ConvergenceError`` and map to exit code 3.
"""


class OpinionShiftError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(OpinionShiftError, ValueError):
    """Invalid argument or specification."""


class DomainError(ValidationError):
    """Argument outside a function's documented domain (e.g. non-finite)."""


class PoleError(DomainError):
    """Evaluation requested exactly at a pole or logarithmic singularity."""


class NonDifferentiableError(DomainError):
    """Score requested at a kink of a Laplace log-density."""


class UnsupportedComboError(ValidationError):
    """No formula or oracle route exists for this prior/signal pair."""


class DispatchError(UnsupportedComboError):
    """Arguments do not match the combination an operation implements."""


class RedirectError(DispatchError):
    """Wrong variant called; ``target`` names the operation to use instead."""

    def __init__(self, message: str, target: str):
        super().__init__(f"{message} (use {target})")
        self.target = target


class DegenerateMixtureError(ValidationError):
    """Mixture with zero weight on the state-centered component."""


class ConvergenceError(OpinionShiftError):
    """A numerical routine did not reach its requested accuracy."""

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved
