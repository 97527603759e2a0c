"""Exception hierarchy shared by all modules."""


class LifshitzAuditError(Exception):
    """Base class for every error raised by this package."""


class DomainError(LifshitzAuditError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(LifshitzAuditError, ValueError):
    """A reduced temperature lies outside the validity range of a fit."""


class ModelError(LifshitzAuditError, ValueError):
    """Oscillator parameters violate a model invariant."""


class SingularityError(LifshitzAuditError, ArithmeticError):
    """Evaluation hit a pole of the oscillator sum or of the
    Clausius-Mossotti inversion."""


class AccuracyError(LifshitzAuditError, RuntimeError):
    """A quadrature did not reach its requested tolerance.

    The achieved estimate and error bound are kept on the instance so callers
    can decide whether the result is still usable.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class ExtractionError(AccuracyError):
    """The large-separation plateau of z^4 U(z) could not be located."""


class ParseError(LifshitzAuditError, ValueError):
    """A model, dataset or CLI argument could not be parsed."""
