"""Exception hierarchy.

Every error the toolkit raises derives from :class:`DyadicError`; the CLI
reports ``type(err).__name__`` verbatim, so class names are part of the
public surface.
"""


class DyadicError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(DyadicError, ValueError):
    """Input rejected before any computation started."""


class AncestorAboveRoot(ValidationError):
    pass


class IntervalTooFine(ValidationError):
    pass


class BadQuantile(ValidationError):
    pass


class BadExponent(ValidationError):
    pass


class NonpositiveWeight(ValidationError):
    pass


class DepthMismatch(ValidationError):
    pass


class DepthTooLarge(ValidationError):
    pass


class AdmissibilityViolation(ValidationError):
    pass


class ZeroFunction(ValidationError):
    pass


class ComputationError(DyadicError, ArithmeticError):
    """A computation started but could not produce a trustworthy result."""


class NoConvergence(ComputationError):
    pass


class DegenerateDomination(ComputationError):
    pass
