"""Physical network parameters."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .errors import ParameterError

# Critical Gilbert-graph connection distance at unit node density.
D_CRITICAL = 1.198


@dataclass(frozen=True)
class NetworkConfig:
    """All physical parameters of the Poisson network and the circular cut.

    Units: ``nu`` nodes/m^2, ``R`` m, ``P`` W, ``N`` W/Hz, ``W`` Hz.
    ``alpha`` (path loss) and ``d`` (critical radius at unit density) are
    dimensionless.
    """

    nu: float = 1.0
    R: float = 100.0
    P: float = 1.0e3
    N: float = 1.0
    W: float = 1.0e3
    alpha: float = 4.0
    d: float = D_CRITICAL

    def __post_init__(self):
        for name in ("nu", "R", "P", "N", "W", "alpha", "d"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ParameterError(f"{name}: expected a real number, got {value!r}")
            if not math.isfinite(value):
                raise ParameterError(f"{name}: must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.nu <= 0:
            raise ParameterError(f"nu: node density must be > 0, got {self.nu}")
        if self.R <= 0:
            raise ParameterError(f"R: cut radius must be > 0, got {self.R}")
        if self.P < 0:
            raise ParameterError(f"P: power must be >= 0, got {self.P}")
        if self.N <= 0:
            raise ParameterError(f"N: noise spectral density must be > 0, got {self.N}")
        if self.W <= 0:
            raise ParameterError(f"W: bandwidth must be > 0, got {self.W}")
        if self.alpha <= 2:
            raise ParameterError(f"alpha: path-loss exponent must be > 2, got {self.alpha}")
        if self.d <= 0:
            raise ParameterError(f"d: critical radius must be > 0, got {self.d}")
        if self.R <= self.r_min:
            raise ParameterError(
                f"R: must exceed d/sqrt(nu) = {self.r_min:.6g} (empty integration range), got {self.R}"
            )

    @classmethod
    def from_snr(cls, p_over_nw: float, *, N: float = 1.0, W: float = 1.0e3, **kwargs) -> "NetworkConfig":
        """Build a config from the SNR parameter P/(NW) instead of P."""
        return cls(P=p_over_nw * N * W, N=N, W=W, **kwargs)

    @property
    def p_over_nw(self) -> float:
        return self.P / (self.N * self.W)

    @property
    def r_min(self) -> float:
        """Lower integration limit d/sqrt(nu), the empty-strip width."""
        return self.d / math.sqrt(self.nu)

    def replace(self, **changes) -> "NetworkConfig":
        return dataclasses.replace(self, **changes)

    def with_snr(self, p_over_nw: float) -> "NetworkConfig":
        return self.replace(P=p_over_nw * self.N * self.W)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)
