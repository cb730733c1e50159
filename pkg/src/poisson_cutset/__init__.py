"""Cut-set capacity bounds for wireless networks with Poisson-distributed nodes."""

from .config import D_CRITICAL, NetworkConfig
from .errors import (
    CutsetError,
    DegenerateGeometryError,
    ExcludedAlphaError,
    NumericalError,
    ParameterError,
    RegimeAmbiguityError,
    TruncationError,
)

__version__ = "0.1.0"

__all__ = [
    "D_CRITICAL",
    "NetworkConfig",
    "CutsetError",
    "DegenerateGeometryError",
    "ExcludedAlphaError",
    "NumericalError",
    "ParameterError",
    "RegimeAmbiguityError",
    "TruncationError",
]
