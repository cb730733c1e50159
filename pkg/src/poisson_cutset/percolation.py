"""Continuum (Gilbert disk graph) percolation experiments.

Nodes closer than the connection distance x (inclusive) are joined.  A
component *reaches* a boundary curve when one of its nodes lies within x/2
of the curve: that is the occupied region of the Boolean model with disks
of radius x/2 touching it.  This convention is used by every experiment
below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np
from scipy.spatial import cKDTree

from .config import D_CRITICAL
from .errors import ParameterError
from .ppp import PointSet, Region, SeedLike, derive_seed, make_rng, sample_ppp


@numba.njit(cache=True)
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@numba.njit(cache=True)
def _union_find_labels(n, edges):
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    for e in range(edges.shape[0]):
        a = _find(parent, edges[e, 0])
        b = _find(parent, edges[e, 1])
        if a == b:
            continue
        if size[a] < size[b]:
            a, b = b, a
        parent[b] = a
        size[a] += size[b]
    for i in range(n):
        parent[i] = _find(parent, i)
    return parent


def component_labels(n: int, edges: np.ndarray) -> np.ndarray:
    """Root label of every node's connected component (union-find with path compression)."""
    edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
    return _union_find_labels(n, edges)


@dataclass(frozen=True)
class GilbertGraph:
    points: np.ndarray
    connection_distance: float
    edges: np.ndarray
    _labels: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def labels(self) -> np.ndarray:
        if self._labels is None:
            object.__setattr__(self, "_labels", component_labels(self.n, self.edges))
        return self._labels


def gilbert_graph(points, x: float) -> GilbertGraph:
    """Join every pair of points at distance <= x."""
    if not x > 0:
        raise ParameterError(f"connection distance must be > 0, got {x}")
    pts = points.points if isinstance(points, PointSet) else np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] < 2:
        edges = np.empty((0, 2), dtype=np.int64)
    else:
        edges = cKDTree(pts).query_pairs(x, output_type="ndarray").astype(np.int64)
    return GilbertGraph(pts, float(x), edges)


def _touching_components(g: GilbertGraph, mask_a: np.ndarray, mask_b: np.ndarray) -> bool:
    if not (mask_a.any() and mask_b.any()):
        return False
    labels = g.labels()
    return bool(np.intersect1d(labels[mask_a], labels[mask_b]).size)


def has_occupied_crossing(g: GilbertGraph, inner_radius: float, outer_radius: float, center=(0.0, 0.0)) -> bool:
    """True iff one component reaches both circles of the annulus."""
    if g.n == 0:
        return False
    rho = np.hypot(g.points[:, 0] - center[0], g.points[:, 1] - center[1])
    half = g.connection_distance / 2.0
    return _touching_components(g, np.abs(rho - inner_radius) <= half, np.abs(rho - outer_radius) <= half)


def has_left_right_crossing(g: GilbertGraph, side: float) -> bool:
    """True iff one component reaches both vertical sides of the box ``[0, side]^2``."""
    if g.n == 0:
        return False
    half = g.connection_distance / 2.0
    x = g.points[:, 0]
    return _touching_components(g, x <= half, x >= side - half)


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo probability with its binomial standard error."""

    probability: float
    std_error: float
    trials: int
    supercritical: bool = False

    @classmethod
    def from_hits(cls, hits: int, trials: int, supercritical: bool = False) -> "Estimate":
        p = hits / trials
        return cls(p, math.sqrt(p * (1.0 - p) / trials), trials, supercritical)


@dataclass(frozen=True)
class CrossingExperiment:
    """Annulus of inner radius R and width m, with connection distance x."""

    nu: float
    R: float
    m: float
    x: float
    trials: int

    def __post_init__(self):
        if self.nu < 0:
            raise ParameterError(f"nu must be >= 0, got {self.nu}")
        for name in ("R", "m", "x"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")

    @classmethod
    def scaled(cls, nu: float, R_scaled: float, k: float, delta: float, trials: int) -> "CrossingExperiment":
        """Experiment in units of 1/sqrt(nu): R = R_scaled/sqrt(nu), x = k/sqrt(nu),
        m = delta * log(R_scaled) / sqrt(nu)."""
        unit = 1.0 / math.sqrt(nu)
        return cls(nu, R_scaled * unit, delta * math.log(R_scaled) * unit, k * unit, trials)


def annulus_crossing_trials(exp: CrossingExperiment, seed: SeedLike) -> np.ndarray:
    """Per-trial crossing indicator, sampling the annulus dilated by x on both sides."""
    region = Region.annulus(max(0.0, exp.R - exp.x), exp.R + exp.m + exp.x)
    out = np.zeros(exp.trials, dtype=bool)
    for t in range(exp.trials):
        pts = sample_ppp(region, exp.nu, make_rng(seed, t))
        out[t] = has_occupied_crossing(gilbert_graph(pts, exp.x), exp.R, exp.R + exp.m)
    return out


def vacant_loop_probability(exp: CrossingExperiment, seed: SeedLike) -> Estimate:
    """Estimate P(vacant loop) = 1 - P(occupied inner-outer crossing) of the annulus."""
    crossings = annulus_crossing_trials(exp, seed)
    return Estimate.from_hits(exp.trials - int(crossings.sum()), exp.trials)


def origin_to_box_probability(nu: float, x: float, m: float, trials: int, seed: SeedLike) -> Estimate:
    """Probability that the component of a node planted at the origin reaches the boundary of [-m, m]^2.

    The estimate is flagged ``supercritical`` when x sqrt(nu) >= d, where
    exponential decay in m is not expected.
    """
    if nu < 0 or not x > 0 or not m > 0 or trials < 1:
        raise ParameterError("need nu >= 0, x > 0, m > 0, trials >= 1")
    supercritical = x * math.sqrt(nu) >= D_CRITICAL
    half = x / 2.0
    if m <= half:
        return Estimate(1.0, 0.0, trials, supercritical)
    extent = m + x
    hits = 0
    for t in range(trials):
        rng = make_rng(seed, t)
        count = int(rng.poisson(nu * (2.0 * extent) ** 2)) if nu > 0 else 0
        pts = np.empty((count + 1, 2))
        pts[0] = 0.0
        pts[1:] = rng.uniform(-extent, extent, size=(count, 2))
        g = gilbert_graph(pts, x)
        labels = g.labels()
        in_origin = labels == labels[0]
        reach = np.max(np.abs(pts[in_origin]), axis=1) >= m - half
        hits += bool(reach.any())
    return Estimate.from_hits(hits, trials, supercritical)


def box_crossing_trials(nu: float, box_side: float, x: float, trials: int, seed: SeedLike) -> np.ndarray:
    """Per-trial left-right crossing indicator for the box ``[0, box_side]^2``.

    Trial ``t`` always samples the same point set for a given seed, so
    indicators are nondecreasing in x (common random numbers).
    """
    out = np.zeros(trials, dtype=bool)
    for t in range(trials):
        rng = make_rng(seed, t)
        count = int(rng.poisson(nu * box_side**2))
        pts = rng.uniform(0.0, box_side, size=(count, 2))
        out[t] = has_left_right_crossing(gilbert_graph(pts, x), box_side)
    return out


def crossing_probability(nu: float, box_side: float, x: float, trials: int, seed: SeedLike) -> Estimate:
    hits = int(box_crossing_trials(nu, box_side, x, trials, seed).sum())
    return Estimate.from_hits(hits, trials)


@dataclass(frozen=True)
class CriticalRadiusEstimate:
    d_estimate: float
    # (x_scaled, crossing_prob, std_err, trials) for every evaluated x, sorted by x.
    scan: list


def estimate_critical_radius(
    nu: float,
    box_side: float,
    trials: int,
    tol: float,
    seed: SeedLike,
    bracket=(0.5, 2.0),
) -> CriticalRadiusEstimate:
    """Bisect the connection distance at which the box crossing probability is 1/2.

    ``bracket`` and the result are in units of 1/sqrt(nu); ``tol`` is in meters.
    """
    if not nu > 0:
        raise ParameterError(f"nu must be > 0, got {nu}")
    if box_side * math.sqrt(nu) < 50:
        raise ParameterError(f"box_side*sqrt(nu) must be >= 50, got {box_side * math.sqrt(nu):.3g}")
    if not tol > 0:
        raise ParameterError(f"tol must be > 0, got {tol}")
    unit = 1.0 / math.sqrt(nu)
    evaluated = {}

    def prob(x):
        est = crossing_probability(nu, box_side, x, trials, seed)
        evaluated[x] = est
        return est.probability

    lo, hi = bracket[0] * unit, bracket[1] * unit
    p_lo, p_hi = prob(lo), prob(hi)
    if not (p_lo < 0.5 < p_hi):
        raise ParameterError(
            f"bracket [{bracket[0]}, {bracket[1]}] does not straddle crossing probability 1/2 "
            f"(got {p_lo:.3f}, {p_hi:.3f})"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if prob(mid) < 0.5:
            lo = mid
        else:
            hi = mid
    scan = [
        (x / unit, est.probability, est.std_error, est.trials) for x, est in sorted(evaluated.items())
    ]
    return CriticalRadiusEstimate(0.5 * (lo + hi) / unit, scan)


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    r_squared: float


def fit_log_linear(ms, probs) -> DecayFit:
    """Least-squares fit of log(prob) against m."""
    ms = np.asarray(ms, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if np.any(probs <= 0):
        raise ParameterError("log-linear fit needs strictly positive probabilities")
    y = np.log(probs)
    slope, intercept = np.polyfit(ms, y, 1)
    resid = y - (slope * ms + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(float(slope), float(intercept), r2)


def decay_scan(nu: float, x: float, ms, trials: int, seed: SeedLike) -> list:
    """``(m, estimate)`` pairs; box size m uses the substream ``(seed, index)``."""
    out = []
    for i, m in enumerate(ms):
        out.append((float(m), origin_to_box_probability(nu, x, m, trials, derive_seed(seed, i))))
    return out

