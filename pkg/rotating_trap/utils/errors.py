"""Exception hierarchy for the rotating trap library.

Numerical failures map to CLI exit status 1, usage failures to 2.
"""


class RotatingTrapError(Exception):
    """Base class for all library errors."""


class NumericalError(RotatingTrapError):
    """A computation could not produce a trustworthy value."""


class BesselOverflowError(NumericalError, OverflowError):
    """Unscaled Bessel value outside the representable range."""


class DomainError(NumericalError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class BranchAmbiguityError(DomainError):
    """Argument on the wrong side of the principal branch cut."""


class SingularPointError(DomainError):
    """Evaluation requested at a singular point."""


class TableRangeError(DomainError):
    """Interpolation requested outside a tabulated range."""


class NoSignChangeError(NumericalError, ValueError):
    """A bracketing root finder received a bracket without sign change."""


class NoValidRegimeError(NumericalError, ValueError):
    """No asymptotic regime covers the requested parameters."""


class ConventionError(NumericalError):
    """A computed quantity has a sign that contradicts its physics."""


class UsageError(RotatingTrapError, ValueError):
    """Invalid command line or configuration input."""
