"""Hypergeometric family g_k and the closed-form antiderivative of the bound integrand.

    g_k(x) = 2F1(1, -b; 1 - b; -x),   b = k / (alpha - 2),   k in {1, 2}

Two evaluation routes are used, both convergent power series:

* small argument (``x <= GK_CROSSOVER``): Pfaff transformation
  ``g_k(x) = 2F1(1, 1; 1 - b; x/(1+x)) / (1 + x)``, argument at most 1/2;
* large argument (``x > GK_CROSSOVER``): the linear transformation to 1/x,
  rewritten with a second Pfaff step as
  ``g_k(x) = b/((b+1)(1+x)) 2F1(1, 1; 2 + b; 1/(1+x)) + C_b x^b`` with
  ``C_b = pi b / sin(pi b)``, argument again at most 1/2.

Both routes are valid for every x > 0; the crossover only selects the one
that converges fastest.  The first part of the large-argument form is
called the *power-free* part, ``g_k(x) - C_b x^b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import NetworkConfig
from .errors import ExcludedAlphaError, NumericalError, ParameterError

GK_CROSSOVER = 1.0
# Half-width, in alpha, of the exclusion window around each pole.
POLE_TOLERANCE = 1e-3
# Below this argument 1 - g_k is summed directly to avoid cancellation.
_DIRECT_SERIES_MAX = 0.5
_MAX_TERMS = 200_000
_EPS = 2.0**-53


@dataclass(frozen=True)
class HypParams:
    k: int
    alpha: float

    def __post_init__(self):
        if self.k not in (1, 2):
            raise ParameterError(f"k must be 1 or 2, got {self.k}")
        if not self.alpha > 2:
            raise ParameterError(f"alpha must be > 2, got {self.alpha}")

    @property
    def b(self) -> float:
        return self.k / (self.alpha - 2.0)


def nearest_pole(k: int, alpha: float):
    """Return the excluded alpha ``2 + k/n`` closest to ``alpha``, or None if n < 1."""
    b = k / (alpha - 2.0)
    best = None
    for n in (math.floor(b), math.ceil(b)):
        if n >= 1:
            pole = 2.0 + k / n
            if best is None or abs(alpha - pole) < abs(alpha - best):
                best = pole
    return best


def check_alpha(alpha: float, ks=(1, 2), tol: float = POLE_TOLERANCE) -> None:
    """Raise ExcludedAlphaError if ``k/(alpha-2)`` is within ``tol`` (in alpha) of a positive integer."""
    for k in ks:
        pole = nearest_pole(k, alpha)
        if pole is not None and abs(alpha - pole) < tol:
            raise ExcludedAlphaError(
                f"alpha = {alpha!r} lies within {tol:g} of the excluded value {pole:.6g} "
                f"({k}/(alpha-2) is an integer there); use the quadrature path instead"
            )


def is_excluded_alpha(alpha: float, tol: float = POLE_TOLERANCE) -> bool:
    try:
        check_alpha(alpha, tol=tol)
    except ExcludedAlphaError:
        return True
    return False


def _f11(c: float, y: float) -> float:
    """2F1(1, 1; c; y) for 0 <= y <= 1 by direct summation of n!/(c)_n y^n."""
    term = 1.0
    total = 1.0
    n = 0
    # Terms can change sign while n + c < 0; only stop once they are decaying.
    settle = max(0.0, -c) + 2.0
    while n < _MAX_TERMS:
        term *= (n + 1.0) / (n + c) * y
        total += term
        n += 1
        if n > settle and abs(term) <= _EPS * abs(total):
            return total
    raise NumericalError(f"2F1(1,1;{c};{y}) did not converge in {_MAX_TERMS} terms", partial=total)


def _pole_constant(b: float) -> float:
    return math.pi * b / math.sin(math.pi * b)


def gk_series(params: HypParams, x: float) -> float:
    """Small-argument route (Pfaff-transformed power series)."""
    x = _check_x(x)
    check_alpha(params.alpha, ks=(params.k,))
    return _f11(1.0 - params.b, x / (1.0 + x)) / (1.0 + x)


def gk_power_free(params: HypParams, x: float) -> float:
    """``g_k(x) - C_b x^b``, the part of the large-argument form without the power term."""
    x = _check_x(x)
    check_alpha(params.alpha, ks=(params.k,))
    if x == 0.0:
        return 1.0
    b = params.b
    return b / ((b + 1.0) * (1.0 + x)) * _f11(2.0 + b, 1.0 / (1.0 + x))


def gk_large_argument(params: HypParams, x: float) -> float:
    """Large-argument route (linear transformation to 1/x)."""
    x = _check_x(x)
    if x == 0.0:
        return 1.0
    b = params.b
    return gk_power_free(params, x) + _pole_constant(b) * x**b


def hyp2f1_gk(params: HypParams, x: float) -> float:
    """Evaluate g_k(x) for x >= 0, picking the faster-converging route."""
    x = _check_x(x)
    if x <= GK_CROSSOVER:
        return gk_series(params, x)
    return gk_large_argument(params, x)


def _one_minus_gk(params: HypParams, x: float) -> float:
    """1 - g_k(x) without cancellation at small x."""
    if x > _DIRECT_SERIES_MAX:
        return 1.0 - hyp2f1_gk(params, x)
    b = params.b
    total = 0.0
    power = 1.0
    for n in range(1, _MAX_TERMS):
        power *= -x
        term = b / (n - b) * power
        total += term
        if n > b + 2 and abs(term) <= _EPS * abs(total):
            return total
    raise NumericalError("1 - g_k series did not converge", partial=total)


def _check_x(x) -> float:
    x = float(x)
    if not (x >= 0.0 and math.isfinite(x)):
        raise ParameterError(f"g_k argument must be finite and >= 0, got {x}")
    return x


def snr_at(cfg: NetworkConfig, r: float) -> float:
    """s_r = 2 pi nu r^(2-alpha) / (alpha-2) * P/(NW)."""
    return 2.0 * math.pi * cfg.nu * r ** (2.0 - cfg.alpha) / (cfg.alpha - 2.0) * cfg.p_over_nw


def _check_r(cfg: NetworkConfig, r: float) -> float:
    r = float(r)
    slack = 1e-12 * cfg.R
    if not (cfg.r_min - slack <= r <= cfg.R + slack):
        raise ParameterError(f"r = {r} outside [d/sqrt(nu), R] = [{cfg.r_min}, {cfg.R}]")
    return r


def _ir_core(cfg: NetworkConfig, r: float, s: float, power_free: bool) -> float:
    a2 = cfg.alpha - 2.0
    R = cfg.R
    p1 = HypParams(1, cfg.alpha)
    p2 = HypParams(2, cfg.alpha)
    if power_free:
        h1 = 1.0 - gk_power_free(p1, s)
        h2 = 1.0 - gk_power_free(p2, s)
    else:
        h1 = _one_minus_gk(p1, s)
        h2 = _one_minus_gk(p2, s)
    return math.log1p(s) * (R - r / 2.0) * r + a2 * r * (R * h1 - (r / 4.0) * h2)


def _power_constant(cfg: NetworkConfig) -> float:
    """Literal I_r minus power-free I_r; independent of r."""
    a2 = cfg.alpha - 2.0
    amp = snr_at(cfg, 1.0)  # s_r = amp * r^(2 - alpha)
    if amp == 0.0:
        return 0.0
    b1 = 1.0 / a2
    b2 = 2.0 / a2
    c1 = _pole_constant(b1) * amp**b1
    c2 = _pole_constant(b2) * amp**b2
    return -a2 * (cfg.R * c1 - c2 / 4.0)


def closed_form_Ir(cfg: NetworkConfig, r: float, *, power_free: bool = False) -> float:
    """Closed-form antiderivative of ``log(1 + s_r) (R - r)`` in r.

        I_r = log(1+s_r)(R - r/2) r + (alpha-2)(R - r/4) r
              - (alpha-2)(R g_1(s_r) - (r/4) g_2(s_r)) r

    With ``power_free=True`` each g_k is replaced by its power-free part;
    the result differs from the literal form by a constant in r (so
    definite integrals agree) but stays bounded when s_r is huge.
    """
    check_alpha(cfg.alpha)
    r = _check_r(cfg, r)
    return _ir_core(cfg, r, snr_at(cfg, r), power_free)


def definite_integral(cfg: NetworkConfig, r_lo: float, r_hi: float) -> float:
    """``I_{r_hi} - I_{r_lo}`` evaluated without large cancelling constants.

    Each endpoint uses the literal form when s_r <= 1 and the power-free
    form otherwise; the constant between the two is added back explicitly.
    """
    check_alpha(cfg.alpha)
    r_lo = _check_r(cfg, r_lo)
    r_hi = _check_r(cfg, r_hi)
    s_lo = snr_at(cfg, r_lo)
    s_hi = snr_at(cfg, r_hi)
    free_lo = s_lo > GK_CROSSOVER
    free_hi = s_hi > GK_CROSSOVER
    value = _ir_core(cfg, r_hi, s_hi, free_hi) - _ir_core(cfg, r_lo, s_lo, free_lo)
    if free_hi != free_lo:
        const = _power_constant(cfg)
        value += const if free_hi else -const
    return value
