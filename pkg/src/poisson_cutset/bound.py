"""Analytical cut-set bound for a circular cut in a Poisson network.

Everything here works in nats/second; conversion to bits happens in the CLI.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from . import specfun
from .config import NetworkConfig
from .errors import NumericalError, ParameterError, RegimeAmbiguityError

DEFAULT_THRESHOLD = 1.0
DEFAULT_DEAD_BAND = 10.0
# Relative tolerance handed to each quadrature piece.
_QUAD_EPSREL = 1e-13
_QUAD_LIMIT = 200
# Ratio between consecutive geometric breakpoints of the integration range.
_PIECE_RATIO = 2.0


class Regime(str, enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    BOUNDARY_ALPHA3 = "BOUNDARY_alpha3"

    @property
    def description(self) -> str:
        return _REGIME_TEXT[self]


_REGIME_TEXT = {
    Regime.I: "bandwidth-limited",
    Regime.II: "power-limited, sublinear (alpha < 3)",
    Regime.III: "power- and bandwidth-limited (alpha > 3)",
    Regime.IV: "power-limited at all ranges (alpha > 3)",
    Regime.BOUNDARY_ALPHA3: "power-limited, alpha = 3 boundary case",
}


@dataclass(frozen=True)
class RegimeLabel:
    case: Regime
    s_long: float
    s_short: float


@dataclass(frozen=True)
class BoundResult:
    value: float  # nats/s
    method: str  # "quadrature" | "closed_form" | "asymptote"
    regime: Optional[RegimeLabel] = None
    quadrature_abs_tol: Optional[float] = None
    abs_error: Optional[float] = None


def is_alpha3(alpha: float) -> bool:
    return math.isclose(alpha, 3.0, rel_tol=0.0, abs_tol=1e-12)


def snr_profile(cfg: NetworkConfig, r):
    """Upper bound s_r on the expected SNR a node at distance r from the cut receives.

    Accepts a scalar or an array of distances.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)):
        raise ParameterError(f"snr_profile needs r > 0, got {r}")
    s = (2.0 * math.pi * cfg.nu / (cfg.alpha - 2.0)) * cfg.p_over_nw * r_arr ** (2.0 - cfg.alpha)
    return float(s) if s.ndim == 0 else s


def short_long_snr(cfg: NetworkConfig):
    """Return ``(s_short, s_long)``: s_r at r = d/sqrt(nu) and at r = R."""
    return snr_profile(cfg, cfg.r_min), snr_profile(cfg, cfg.R)


def classify_regime(
    cfg: NetworkConfig,
    threshold: float = DEFAULT_THRESHOLD,
    dead_band: float = DEFAULT_DEAD_BAND,
) -> RegimeLabel:
    """Map (s_short, s_long) to one of the operating regimes.

    An SNR counts as large above ``threshold * dead_band`` and small below
    ``threshold / dead_band``; values in between raise RegimeAmbiguityError.
    """
    if not threshold > 0:
        raise ParameterError(f"threshold must be > 0, got {threshold}")
    if not dead_band >= 1:
        raise ParameterError(f"dead_band must be >= 1, got {dead_band}")
    s_short, s_long = short_long_snr(cfg)
    hi = threshold * dead_band
    lo = threshold / dead_band

    def label(case):
        return RegimeLabel(case, s_long, s_short)

    if s_long > hi:
        return label(Regime.I)
    if cfg.alpha < 3 and not is_alpha3(cfg.alpha):
        low_case = Regime.II
    elif is_alpha3(cfg.alpha):
        low_case = Regime.BOUNDARY_ALPHA3
    else:
        low_case = None
    if s_long >= lo:
        candidates = (low_case.value,) if low_case else ("III", "IV")
        raise RegimeAmbiguityError(
            f"s_long = {s_long:.4g} is inside the dead band [{lo:g}, {hi:g}]; "
            f"regime is between I and {'/'.join(candidates)}",
            ("I",) + candidates,
        )
    if low_case is not None:
        return label(low_case)
    if s_short > hi:
        return label(Regime.III)
    if s_short < lo:
        return label(Regime.IV)
    raise RegimeAmbiguityError(
        f"s_short = {s_short:.4g} is inside the dead band [{lo:g}, {hi:g}]; regime is between III and IV",
        ("III", "IV"),
    )


def _safe_label(cfg, threshold=DEFAULT_THRESHOLD, dead_band=DEFAULT_DEAD_BAND):
    try:
        return classify_regime(cfg, threshold, dead_band)
    except RegimeAmbiguityError:
        return None


def _breakpoints(lo: float, hi: float) -> np.ndarray:
    n = max(1, int(math.ceil(math.log(hi / lo) / math.log(_PIECE_RATIO))))
    pts = np.geomspace(lo, hi, n + 1)
    pts[0], pts[-1] = lo, hi
    return pts


def _integrand(cfg: NetworkConfig):
    amp = 2.0 * math.pi * cfg.nu / (cfg.alpha - 2.0) * cfg.p_over_nw
    expo = 2.0 - cfg.alpha
    R = cfg.R

    def f(r):
        return math.log1p(amp * r**expo) * (R - r)

    return f


def _scale_estimate(cfg: NetworkConfig, pts: np.ndarray) -> float:
    """Midpoint-rule estimate of the integral on the geometric grid (order of magnitude)."""
    f = _integrand(cfg)
    mids = np.sqrt(pts[:-1] * pts[1:])
    return float(sum(f(m) * (b - a) for m, a, b in zip(mids, pts[:-1], pts[1:])))


def cutset_bound_quadrature(cfg: NetworkConfig, abs_tol: Optional[float] = None) -> BoundResult:
    """``2 pi nu W * integral_{d/sqrt(nu)}^{R} log(1 + s_r)(R - r) dr`` by adaptive quadrature.

    The range is cut into geometrically growing pieces so that the steep
    region near ``d/sqrt(nu)`` gets its own subintervals.  ``abs_tol`` is in
    nats/s and defaults to 1e-9 of a midpoint-rule scale estimate.
    """
    prefactor = 2.0 * math.pi * cfg.nu * cfg.W
    label = _safe_label(cfg)
    if cfg.P == 0.0:
        return BoundResult(0.0, "quadrature", label, abs_tol or 0.0, 0.0)
    pts = _breakpoints(cfg.r_min, cfg.R)
    if abs_tol is None:
        abs_tol = 1e-9 * prefactor * _scale_estimate(cfg, pts)
    if not abs_tol > 0:
        raise ParameterError(f"abs_tol must be > 0, got {abs_tol}")
    f = _integrand(cfg)
    piece_tol = abs_tol / prefactor / (len(pts) - 1)
    total = 0.0
    err = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, e, *_ = integrate.quad(
                f, a, b, epsabs=piece_tol, epsrel=_QUAD_EPSREL, limit=_QUAD_LIMIT, full_output=1
            )
        total += val
        err += e
    value = prefactor * total
    abs_err = prefactor * err
    if abs_err > abs_tol:
        raise NumericalError(
            f"quadrature error estimate {abs_err:.3g} exceeds abs_tol {abs_tol:.3g}", partial=value
        )
    return BoundResult(value, "quadrature", label, abs_tol, abs_err)


def cutset_bound_closed_form(cfg: NetworkConfig) -> BoundResult:
    """``2 pi nu W (I_R - I_{d/sqrt(nu)})`` from the hypergeometric antiderivative.

    Raises ExcludedAlphaError near the poles of the closed form; there is no
    automatic fallback to quadrature.
    """
    specfun.check_alpha(cfg.alpha)
    label = _safe_label(cfg)
    if cfg.P == 0.0:
        return BoundResult(0.0, "closed_form", label)
    value = 2.0 * math.pi * cfg.nu * cfg.W * specfun.definite_integral(cfg, cfg.r_min, cfg.R)
    return BoundResult(value, "closed_form", label)


def asymptote_constants(alpha: float, d: float = 1.198) -> dict:
    """K1, K2, K3 of the asymptotic regimes (entries are None where undefined)."""
    a2 = alpha - 2.0
    out = {"K1": None, "K2": None, "K3": None}
    if alpha != 3 and alpha != 4:
        out["K1"] = 4 * math.pi**2 / (a2 * (3 - alpha) * (4 - alpha))
    if alpha > 3:
        out["K2"] = (2 * math.pi) ** ((alpha - 1) / a2) / a2 ** (1 / a2) * math.pi / math.sin(math.pi / a2)
        out["K3"] = 4 * math.pi**2 * d ** (3 - alpha) / (a2 * (alpha - 3))
    return out


def asymptote_value(cfg: NetworkConfig, case: Regime, second_order: bool = False) -> float:
    """Evaluate the asymptotic bound of ``case`` for ``cfg`` (nats/s), regardless of regime."""
    nu, R, W, alpha = cfg.nu, cfg.R, cfg.W, cfg.alpha
    p_over_n = cfg.P / cfg.N
    if cfg.P == 0.0:
        return 0.0
    consts = asymptote_constants(alpha, cfg.d)
    if case is Regime.I:
        s_long = snr_profile(cfg, R)
        extra = 1.5 * (alpha - 2.0) if second_order else 0.0
        return math.pi * nu * R**2 * W * (math.log(s_long) + extra)
    if case is Regime.II:
        if consts["K1"] is None or alpha >= 3:
            raise ParameterError("regime II asymptote needs alpha < 3")
        return consts["K1"] * nu**2 * R ** (4 - alpha) * p_over_n
    if case is Regime.BOUNDARY_ALPHA3:
        return 4 * math.pi**2 * nu**2 * R * math.log(R) * p_over_n
    if alpha <= 3:
        raise ParameterError(f"regime {case.value} asymptote needs alpha > 3")
    if case is Regime.III:
        a2 = alpha - 2.0
        return consts["K2"] * nu ** ((alpha - 1) / a2) * R * p_over_n ** (1 / a2) * W ** ((alpha - 3) / a2)
    if case is Regime.IV:
        return consts["K3"] * nu ** ((1 + alpha) / 2) * R * p_over_n
    raise ParameterError(f"unknown regime {case!r}")


def corollary_asymptote(
    cfg: NetworkConfig,
    threshold: float = DEFAULT_THRESHOLD,
    dead_band: float = DEFAULT_DEAD_BAND,
    second_order: bool = False,
) -> BoundResult:
    """Asymptotic bound for the regime ``cfg`` falls in.

    Case I uses ``pi nu R^2 W log(s_R)``.  With ``second_order=True`` the
    next term of the expansion of I_R is kept, giving
    ``pi nu R^2 W (log(s_R) + 3(alpha-2)/2)``.
    Raises RegimeAmbiguityError inside the dead band.
    """
    label = classify_regime(cfg, threshold, dead_band)
    value = asymptote_value(cfg, label.case, second_order=second_order)
    return BoundResult(value, "asymptote", label)
