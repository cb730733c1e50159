"""Homogeneous Poisson point processes in disks and annuli.

Seeds follow one splittable scheme everywhere in the package: a master
integer seed plus a tuple of integer keys (trial index, draw index, ...)
feed ``numpy.random.SeedSequence(seed, spawn_key=keys)``.  Each work unit
therefore gets an independent, reproducible stream no matter which order
units are executed in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .csvio import write_csv
from .errors import ParameterError

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]


def make_rng(seed: SeedLike, *keys: int) -> np.random.Generator:
    """Return a generator for the work unit ``keys`` under master ``seed``."""
    if isinstance(seed, np.random.Generator):
        if keys:
            raise ParameterError("cannot derive keyed streams from an existing Generator")
        return seed
    if not isinstance(seed, np.random.SeedSequence) and int(seed) < 0:
        raise ParameterError(f"seed must be nonnegative, got {seed}")
    return np.random.default_rng(derive_seed(seed, *keys))


def derive_seed(seed: SeedLike, *keys: int) -> np.random.SeedSequence:
    """Seed for a sub-experiment whose own work-unit keys nest below ``keys``."""
    if isinstance(seed, np.random.Generator):
        raise ParameterError("cannot derive keyed streams from an existing Generator")
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(keys))
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))


@dataclass(frozen=True)
class Region:
    """A disk (``inner_radius == 0``) or an annulus centred at ``center``."""

    outer_radius: float
    inner_radius: float = 0.0
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not (math.isfinite(self.outer_radius) and math.isfinite(self.inner_radius)):
            raise ParameterError("region radii must be finite")
        if self.inner_radius < 0 or self.outer_radius < 0:
            raise ParameterError(
                f"region radii must be nonnegative, got ({self.inner_radius}, {self.outer_radius})"
            )
        if not self.inner_radius < self.outer_radius:
            raise ParameterError(
                f"region needs inner_radius < outer_radius, got ({self.inner_radius}, {self.outer_radius})"
            )
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @classmethod
    def disk(cls, radius: float, center=(0.0, 0.0)) -> "Region":
        return cls(outer_radius=radius, inner_radius=0.0, center=center)

    @classmethod
    def annulus(cls, inner_radius: float, outer_radius: float, center=(0.0, 0.0)) -> "Region":
        return cls(outer_radius=outer_radius, inner_radius=inner_radius, center=center)

    @property
    def kind(self) -> str:
        return "disk" if self.inner_radius == 0.0 else "annulus"

    def area(self) -> float:
        return math.pi * (self.outer_radius**2 - self.inner_radius**2)

    def radial_distance(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return np.hypot(pts[:, 0] - self.center[0], pts[:, 1] - self.center[1])

    def contains(self, points: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
        # rtol absorbs the rounding of the polar-to-Cartesian conversion
        rho = self.radial_distance(points)
        slack = rtol * self.outer_radius
        return (rho >= self.inner_radius - slack) & (rho <= self.outer_radius + slack)


@dataclass(frozen=True)
class PointSet:
    """One realization of a point process.

    ``points`` is an ``(n, 2)`` float array in meters.
    """

    points: np.ndarray
    source_region: Region
    intensity: float

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.intensity < 0:
            raise ParameterError(f"intensity must be >= 0, got {self.intensity}")

    def __len__(self) -> int:
        return self.points.shape[0]

    def to_csv(self, path) -> None:
        """Write the points as ``x,y`` rows with 17 significant digits."""
        write_csv(path, ["x", "y"], ((float(x), float(y)) for x, y in self.points))


def sample_ppp(region: Region, intensity: float, seed: SeedLike) -> PointSet:
    """Sample a homogeneous Poisson process of ``intensity`` nodes/m^2 in ``region``.

    The count is Poisson(intensity * area); positions are uniform via the
    inverse-CDF radius transform ``rho = sqrt(a^2 + u (b^2 - a^2))``.
    """
    if not isinstance(region, Region):
        raise ParameterError("region must be a Region")
    if not math.isfinite(intensity) or intensity < 0:
        raise ParameterError(f"intensity must be a finite value >= 0, got {intensity}")
    area = region.area()
    if area <= 0:
        raise ParameterError("region has nonpositive area")
    rng = make_rng(seed)
    n = int(rng.poisson(intensity * area)) if intensity > 0 else 0
    if n == 0:
        return PointSet(np.empty((0, 2)), region, intensity)
    a2 = region.inner_radius**2
    b2 = region.outer_radius**2
    rho = np.sqrt(a2 + rng.random(n) * (b2 - a2))
    # Guard against rounding pushing rho just outside [a, b].
    rho = np.clip(rho, region.inner_radius, region.outer_radius)
    phi = rng.random(n) * (2.0 * math.pi)
    pts = np.column_stack(
        (region.center[0] + rho * np.cos(phi), region.center[1] + rho * np.sin(phi))
    )
    return PointSet(pts, region, intensity)


def enforce_empty_strip(ps: PointSet, R: float, width: float) -> PointSet:
    """Drop every point whose radial distance lies in ``(R - width, R]``.

    Order of the surviving points is preserved; the operation is idempotent.
    """
    if not (width > 0):
        raise ParameterError(f"strip width must be > 0, got {width}")
    if width >= R:
        raise ParameterError(f"strip width {width} must be smaller than R = {R}")
    if len(ps) == 0:
        return ps
    rho = ps.source_region.radial_distance(ps.points)
    keep = ~((rho > R - width) & (rho <= R))
    return PointSet(ps.points[keep], ps.source_region, ps.intensity)
