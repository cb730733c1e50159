"""Monte Carlo validation of the MIMO -> MISO -> geometry bound chain.

For one realization of transmitter positions (outside the cut) and receiver
positions (inside it), and one fading draw ``H_ij = r_ij^(-alpha/2) h_ij``:

    mimo   = W log det(I + (P/NW) H H*)
    miso   = W sum_i log(1 + (P/NW) sum_j |H_ij|^2)     (Hadamard: mimo <= miso)
    jensen = W sum_i log(1 + (P/NW) sum_j r_ij^-alpha)  (E_h[miso] <= jensen)

All capacities are in nats/s.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, special

from .config import NetworkConfig
from .csvio import write_csv
from .errors import DegenerateGeometryError, NumericalError, ParameterError, TruncationError
from .ppp import PointSet, Region, SeedLike, enforce_empty_strip, make_rng, sample_ppp

# Default cap on the analytic tail fraction (R / truncation)^(alpha-2).
DEFAULT_MAX_TAIL_FRACTION = 0.02

# Stream keys below the trial index.
_GEOMETRY_STREAM = 0
_FADING_STREAM = 1
# Fading draws are processed in batches of at most this many channel entries.
_MAX_BATCH_ENTRIES = 4_000_000


class FadingModel(str, enum.Enum):
    RAYLEIGH = "rayleigh"
    UNIFORM_PHASE = "uniform_phase"


def draw_fading(model, shape, rng: np.random.Generator) -> np.ndarray:
    """Unit-power, symmetric, independent fading coefficients."""
    model = FadingModel(model)
    if model is FadingModel.RAYLEIGH:
        pairs = rng.standard_normal(tuple(shape) + (2,))
        pairs *= math.sqrt(0.5)
        return pairs.view(complex)[..., 0]
    phase = rng.random(shape) * (2.0 * math.pi)
    return np.exp(1j * phase)


@dataclass(frozen=True)
class ChannelMatrix:
    """Complex gains of one fading draw; rows are receivers, columns transmitters."""

    gains: np.ndarray
    tx_positions: np.ndarray
    rx_positions: np.ndarray
    alpha: float


def _as_points(ps) -> np.ndarray:
    if isinstance(ps, PointSet):
        return ps.points
    return np.asarray(ps, dtype=float).reshape(-1, 2)


def pairwise_distances(rx, tx) -> np.ndarray:
    """``(n_rx, n_tx)`` distances; raises DegenerateGeometryError on a zero distance."""
    rx_pts = _as_points(rx)
    tx_pts = _as_points(tx)
    dist = np.hypot(
        rx_pts[:, 0, None] - tx_pts[None, :, 0],
        rx_pts[:, 1, None] - tx_pts[None, :, 1],
    )
    if dist.size and not np.all(dist > 0):
        raise DegenerateGeometryError("a transmitter coincides with a receiver (r_ij = 0)")
    return dist


def path_gain(rx, tx, alpha: float) -> np.ndarray:
    """``r_ij^(-alpha)`` for every receiver/transmitter pair."""
    return pairwise_distances(rx, tx) ** (-alpha)


def build_channel(tx, rx, alpha: float, fading, seed: SeedLike) -> ChannelMatrix:
    """One fading draw of ``H_ij = r_ij^(-alpha/2) h_ij``."""
    if not alpha > 2:
        raise ParameterError(f"alpha must be > 2, got {alpha}")
    amp = pairwise_distances(rx, tx) ** (-alpha / 2.0)
    h = draw_fading(fading, amp.shape, make_rng(seed))
    return ChannelMatrix(amp * h, _as_points(tx), _as_points(rx), alpha)


def _row_power(gains: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...ij->...i", gains.real, gains.real) + np.einsum(
        "...ij,...ij->...i", gains.imag, gains.imag
    )


def _mimo_nats_batch(gains: np.ndarray, snrs: Sequence[float]) -> np.ndarray:
    """log det(I + snr H H*) for a batch of draws; shape ``(len(snrs), draws)``.

    When receivers are the smaller side the determinant is split as
    ``sum_i log(1 + snr G_ii) + log det C`` with C the unit-diagonal
    normalization of ``I + snr G``.  log det C <= 0 holds exactly in floating
    point, so the per-draw Hadamard ordering against the MISO sum (computed
    from the same row powers) cannot be broken by rounding.
    """
    draws, n_rx, n_tx = gains.shape
    out = np.zeros((len(snrs), draws))
    if n_rx == 0 or n_tx == 0:
        return out
    if n_rx <= n_tx:
        gram = gains @ np.conj(np.swapaxes(gains, 1, 2))
        diag = _row_power(gains)
    else:
        gh = np.conj(np.swapaxes(gains, 1, 2))
        gram = gh @ gains
        diag = _row_power(gh)
    idx = np.arange(gram.shape[-1])
    for k, snr in enumerate(snrs):
        if snr == 0.0:
            continue
        a_diag = 1.0 + snr * diag
        scale = 1.0 / np.sqrt(a_diag)
        corr = snr * gram * scale[:, :, None] * scale[:, None, :]
        corr[:, idx, idx] = 1.0
        try:
            chol = np.linalg.cholesky(corr)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"Cholesky factorization failed: {exc}") from exc
        log_det_corr = 2.0 * np.sum(np.log(np.real(np.diagonal(chol, axis1=1, axis2=2))), axis=1)
        out[k] = np.sum(np.log1p(snr * diag), axis=1) + log_det_corr
    return out


def _miso_nats_batch(gains: np.ndarray, snrs: Sequence[float]) -> np.ndarray:
    diag = _row_power(gains)
    return np.stack([np.sum(np.log1p(snr * diag), axis=-1) for snr in snrs])


def mimo_capacity(ch: ChannelMatrix, cfg: NetworkConfig) -> float:
    """``W log det(I + (P/NW) H H*)`` for one draw (nats/s)."""
    return cfg.W * float(_mimo_nats_batch(ch.gains[None], [cfg.p_over_nw])[0, 0])


def miso_sum_capacity(ch: ChannelMatrix, cfg: NetworkConfig) -> float:
    """``W sum_i log(1 + (P/NW) sum_j |H_ij|^2)`` for one draw (nats/s)."""
    return cfg.W * float(_miso_nats_batch(ch.gains[None], [cfg.p_over_nw])[0, 0])


def jensen_geometry_bound(tx, rx, cfg: NetworkConfig) -> float:
    """Fading-free bound ``W sum_i log(1 + (P/NW) sum_j r_ij^-alpha)`` (nats/s)."""
    g = path_gain(rx, tx, cfg.alpha)
    return cfg.W * float(np.sum(np.log1p(cfg.p_over_nw * g.sum(axis=1))))


def received_snr(rx_point, tx, cfg: NetworkConfig) -> float:
    """Total SNR ``(P/NW) sum_j r_j^-alpha`` at one receiver."""
    g = path_gain(np.asarray(rx_point, dtype=float).reshape(1, 2), tx, cfg.alpha)
    return cfg.p_over_nw * float(g.sum())


def campbell_annulus_mean(rho: float, inner: float, outer: float, nu: float, alpha: float) -> float:
    """``E[sum_j r_j^-alpha]`` for Poisson(nu) points in an annulus, seen from radius ``rho < inner``.

    The angular integral is done in closed form,
    ``int_0^{2pi} (a - b cos phi)^(-t) dphi = 2 pi a^(-t) 2F1(t/2, (t+1)/2; 1; (b/a)^2)``,
    and the radial one by adaptive quadrature.
    """
    if not 0 <= rho < inner < outer:
        raise ParameterError("need 0 <= rho < inner < outer")
    t = alpha / 2.0

    def radial(s):
        a = s * s + rho * rho
        z = (2.0 * s * rho / a) ** 2
        return 2.0 * math.pi * s * a ** (-t) * special.hyp2f1(t / 2.0, (t + 1.0) / 2.0, 1.0, z)

    pts = np.unique(np.concatenate([[inner], np.geomspace(inner, outer, 12)[1:-1], [outer]]))
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, _ = integrate.quad(radial, a, b, epsabs=0.0, epsrel=1e-12, limit=200)
        total += val
    return nu * total


def tail_fraction(cfg: NetworkConfig, truncation_radius: float) -> float:
    """Share of s_R lost by dropping transmitters beyond ``truncation_radius``.

    For the receiver farthest from the cut (the disk centre) the omitted
    expected SNR is s evaluated at the truncation radius, so the fraction is
    ``(R / truncation_radius)^(alpha - 2)``.
    """
    if not truncation_radius > cfg.R:
        raise ParameterError(f"truncation_radius must exceed R = {cfg.R}, got {truncation_radius}")
    return (cfg.R / truncation_radius) ** (cfg.alpha - 2.0)


@dataclass(frozen=True)
class CapacityEstimate:
    mean: float
    std_error: float
    trials: int
    units_note: str = "nats/s"


@dataclass(frozen=True)
class CutsetEstimate:
    """Three parallel estimates of the expected cut-set capacity."""

    mimo: CapacityEstimate
    miso: CapacityEstimate
    jensen: CapacityEstimate
    tail_fraction: float
    hadamard_violations: int
    records: Optional[list] = field(default=None, repr=False)


def _nested_estimate(samples: np.ndarray) -> CapacityEstimate:
    """Mean and standard error of a ``(trials, draws)`` array.

    With several trials the error comes from the spread of per-trial means
    (draws within a trial share one geometry); a single trial falls back to
    the spread over its draws.
    """
    trials, draws = samples.shape
    per_trial = samples.mean(axis=1)
    mean = float(per_trial.mean())
    if trials > 1:
        se = float(per_trial.std(ddof=1) / math.sqrt(trials))
    elif draws > 1:
        se = float(samples[0].std(ddof=1) / math.sqrt(draws))
    else:
        se = 0.0
    return CapacityEstimate(mean, se, trials)


def _check_sweep(cfgs: Sequence[NetworkConfig]) -> None:
    base = cfgs[0]
    for c in cfgs[1:]:
        if (c.nu, c.R, c.alpha, c.d) != (base.nu, base.R, base.alpha, base.d):
            raise ParameterError("configs in one Monte Carlo sweep may differ only in P, N, W")


def estimate_expected_cutset_sweep(
    cfgs: Sequence[NetworkConfig],
    trials: int,
    fading_draws: int,
    truncation_radius: float,
    seed: SeedLike,
    fading=FadingModel.RAYLEIGH,
    max_tail_fraction: float = DEFAULT_MAX_TAIL_FRACTION,
    keep_records: bool = False,
) -> list:
    """Run :func:`estimate_expected_cutset` for configs sharing geometry parameters.

    Positions and fading draws do not depend on P, N or W, so one set of
    samples serves every config; each result equals the one a separate call
    with the same seed would give.
    """
    cfgs = list(cfgs)
    if not cfgs:
        raise ParameterError("need at least one config")
    _check_sweep(cfgs)
    if trials < 1 or fading_draws < 1:
        raise ParameterError("trials and fading_draws must be >= 1")
    base = cfgs[0]
    tail = tail_fraction(base, truncation_radius)
    if tail > max_tail_fraction:
        raise TruncationError(
            f"truncation radius {truncation_radius} leaves a tail fraction {tail:.3g} > "
            f"{max_tail_fraction:g}; enlarge it to at least "
            f"{base.R * max_tail_fraction ** (-1.0 / (base.alpha - 2.0)):.6g}"
        )
    snrs = [c.p_over_nw for c in cfgs]
    n = len(cfgs)
    mimo = np.zeros((n, trials, fading_draws))
    miso = np.zeros((n, trials, fading_draws))
    jensen = np.zeros((n, trials, 1))
    inside = Region.disk(base.R)
    outside = Region.annulus(base.R, truncation_radius)
    for t in range(trials):
        geo = make_rng(seed, t, _GEOMETRY_STREAM)
        rx = enforce_empty_strip(sample_ppp(inside, base.nu, geo), base.R, base.r_min)
        tx = sample_ppp(outside, base.nu, geo)
        if len(rx) == 0 or len(tx) == 0:
            continue
        amp = pairwise_distances(rx, tx) ** (-base.alpha / 2.0)
        gain_sum = np.sum(amp * amp, axis=1)
        for k, snr in enumerate(snrs):
            jensen[k, t, 0] = np.sum(np.log1p(snr * gain_sum))
        chunk = max(1, _MAX_BATCH_ENTRIES // amp.size)
        for j0 in range(0, fading_draws, chunk):
            js = range(j0, min(j0 + chunk, fading_draws))
            h = np.stack([draw_fading(fading, amp.shape, make_rng(seed, t, _FADING_STREAM, j)) for j in js])
            gains = amp[None] * h
            mimo[:, t, js.start:js.stop] = _mimo_nats_batch(gains, snrs)
            miso[:, t, js.start:js.stop] = _miso_nats_batch(gains, snrs)
    results = []
    for k, c in enumerate(cfgs):
        w = c.W
        records = None
        if keep_records:
            records = [
                (t, j, w * mimo[k, t, j], w * miso[k, t, j], w * jensen[k, t, 0])
                for t in range(trials)
                for j in range(fading_draws)
            ]
        results.append(
            CutsetEstimate(
                mimo=_nested_estimate(w * mimo[k]),
                miso=_nested_estimate(w * miso[k]),
                jensen=_nested_estimate(w * jensen[k]),
                tail_fraction=tail,
                hadamard_violations=int(np.count_nonzero(mimo[k] > miso[k])),
                records=records,
            )
        )
    return results


def estimate_expected_cutset(
    cfg: NetworkConfig,
    trials: int,
    fading_draws: int,
    truncation_radius: float,
    seed: SeedLike,
    fading=FadingModel.RAYLEIGH,
    max_tail_fraction: float = DEFAULT_MAX_TAIL_FRACTION,
    keep_records: bool = False,
) -> CutsetEstimate:
    """Estimate E[mimo], E[miso] and E[jensen] over Poisson positions and fading.

    Each trial samples receivers in the disk of radius R with the outer strip
    of width d/sqrt(nu) emptied, and transmitters in the annulus
    (R, truncation_radius).  Trial ``t`` uses the stream ``(seed, t, 0)`` for
    positions and ``(seed, t, 1, j)`` for fading draw ``j``.
    """
    return estimate_expected_cutset_sweep(
        [cfg], trials, fading_draws, truncation_radius, seed, fading, max_tail_fraction, keep_records
    )[0]


def write_records_csv(path, records) -> None:
    write_csv(path, ["trial", "draw", "mimo_nats", "miso_nats", "jensen_nats"], records)

