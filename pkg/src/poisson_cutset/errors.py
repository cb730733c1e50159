"""Exception hierarchy shared by all modules."""


class CutsetError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(CutsetError, ValueError):
    """Invalid input parameter or configuration field."""


class ExcludedAlphaError(ParameterError):
    """Path-loss exponent sits on (or within tolerance of) a pole of the closed form.

    Callers should fall back to quadrature.
    """


class DegenerateGeometryError(CutsetError, ValueError):
    """Coincident transmitter/receiver positions (zero distance)."""


class TruncationError(ParameterError):
    """Truncated outer region leaves too much of the interference tail out."""


class RegimeAmbiguityError(CutsetError, ValueError):
    """SNR values fall inside the classifier dead band."""

    def __init__(self, message, candidates):
        super().__init__(message)
        self.candidates = tuple(candidates)


class NumericalError(CutsetError, ArithmeticError):
    """A numerical procedure failed; ``partial`` carries the best estimate, if any."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
