import math

import mpmath
import pytest
from scipy import integrate

from poisson_cutset.config import NetworkConfig

mpmath.mp.dps = 40


def gk_oracle(k, alpha, x, terms=None):
    """g_k(x) = 2F1(1, -b; 1-b; -x), b = k/(alpha-2), in 40-digit arithmetic.

    With ``terms`` the defining power series is summed directly (only valid
    for x < 1); otherwise mpmath's own hyp2f1 is used.
    """
    b = mpmath.mpf(k) / (mpmath.mpf(alpha) - 2)
    x = mpmath.mpf(x)
    if terms is None:
        return mpmath.hyp2f1(1, -b, 1 - b, -x)
    # n-th coefficient: (-b)_n / (1-b)_n = -b/(n-b) for n >= 1
    total = mpmath.mpf(1)
    power = mpmath.mpf(1)
    for n in range(1, terms):
        power *= -x
        total += -b / (n - b) * power
    return total


def integral_oracle(cfg: NetworkConfig, lo: float, hi: float) -> float:
    """Plain adaptive quadrature of log(1+s_r)(R-r) on [lo, hi], independent of the package."""
    amp = 2 * math.pi * cfg.nu / (cfg.alpha - 2) * cfg.p_over_nw

    def f(r):
        return math.log1p(amp * r ** (2 - cfg.alpha)) * (cfg.R - r)

    # Split at geometric points so the steep part near lo is resolved.
    pts = [lo]
    while pts[-1] * 1.5 < hi:
        pts.append(pts[-1] * 1.5)
    pts.append(hi)
    return math.fsum(
        integrate.quad(f, a, b, epsabs=0, epsrel=1e-13, limit=500)[0] for a, b in zip(pts[:-1], pts[1:])
    )


def mp_integral(cfg: NetworkConfig, lo: float, hi: float) -> float:
    """Extended-precision integral of log(1+s_r)(R-r) on [lo, hi]."""
    amp = 2 * mpmath.pi * cfg.nu / (mpmath.mpf(cfg.alpha) - 2) * cfg.p_over_nw
    e = 2 - mpmath.mpf(cfg.alpha)
    R = mpmath.mpf(cfg.R)
    f = lambda r: mpmath.log1p(amp * r**e) * (R - r)  # noqa: E731
    pts = [mpmath.mpf(lo)]
    while pts[-1] * 2 < hi:
        pts.append(pts[-1] * 2)
    pts.append(mpmath.mpf(hi))
    return float(mpmath.quad(f, pts))


@pytest.fixture
def canonical():
    return NetworkConfig.from_snr(1.0, nu=1.0, R=100.0, W=1e3, alpha=4.0)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
