"""Planar locations, study regions, and grid construction.

All coordinates are planar (projected) study units; distances are Euclidean.
Callers working in geographic coordinates must project before handing
locations to this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True, order=True)
class Location:
    """A point in the study region.  Equality is exact coordinate equality."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"location coordinates must be finite, got ({self.x}, {self.y})")

    def distance_to(self, other: "Location") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def locations_to_xy(locations: Sequence[Location]) -> np.ndarray:
    """Pack locations into an (n, 2) float64 array."""
    out = np.empty((len(locations), 2), dtype=np.float64)
    for i, loc in enumerate(locations):
        out[i, 0] = loc.x
        out[i, 1] = loc.y
    return out


def xy_to_locations(xy: np.ndarray) -> list[Location]:
    return [Location(float(x), float(y)) for x, y in np.asarray(xy, dtype=np.float64)]


def pairwise_distances(xy_a: np.ndarray, xy_b: np.ndarray | None = None) -> np.ndarray:
    """Euclidean distance matrix between two point sets (or within one)."""
    a = np.asarray(xy_a, dtype=np.float64)
    b = a if xy_b is None else np.asarray(xy_b, dtype=np.float64)
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def min_pairwise_distance(xy: np.ndarray) -> float:
    """Smallest distance between distinct points; inf for fewer than 2 points."""
    xy = np.asarray(xy, dtype=np.float64)
    if len(xy) < 2:
        return math.inf
    d = pairwise_distances(xy)
    np.fill_diagonal(d, np.inf)
    return float(d.min())


@dataclass(frozen=True)
class Region:
    """Study region: an axis-aligned rectangle or an explicit candidate set.

    Exactly one of ``rect`` (xmin, ymin, xmax, ymax) and ``points`` is set.
    """

    rect: tuple[float, float, float, float] | None = None
    points: tuple[Location, ...] | None = None

    def __post_init__(self):
        if (self.rect is None) == (self.points is None):
            raise ValueError("region requires exactly one of rect or points")
        if self.rect is not None:
            xmin, ymin, xmax, ymax = self.rect
            if not all(math.isfinite(v) for v in self.rect):
                raise ValueError("rectangle bounds must be finite")
            if xmax <= xmin or ymax <= ymin:
                raise ValueError("rectangle must have positive area")
        else:
            if len(self.points) == 0:
                raise ValueError("candidate set must be nonempty")
            if len(set(self.points)) != len(self.points):
                raise ValueError("candidate set must be duplicate-free")

    @classmethod
    def rectangle(cls, xmin: float, ymin: float, xmax: float, ymax: float) -> "Region":
        return cls(rect=(xmin, ymin, xmax, ymax))

    @classmethod
    def unit_square(cls) -> "Region":
        return cls(rect=(0.0, 0.0, 1.0, 1.0))

    @classmethod
    def from_points(cls, points: Iterable[Location]) -> "Region":
        return cls(points=tuple(points))

    @property
    def is_explicit(self) -> bool:
        return self.points is not None

    def diameter(self) -> float:
        if self.rect is not None:
            xmin, ymin, xmax, ymax = self.rect
            return math.hypot(xmax - xmin, ymax - ymin)
        xy = locations_to_xy(self.points)
        span = xy.max(axis=0) - xy.min(axis=0)
        return float(math.hypot(*span))

    def evaluation_points(self, grid_k: int | None = None) -> list[Location]:
        """Finite point set representing the region: the explicit candidates,
        or a ``grid_k`` x ``grid_k`` cell-center grid over the rectangle."""
        if self.points is not None:
            return list(self.points)
        if grid_k is None:
            raise ValueError("grid_k required to discretize a rectangle region")
        return regular_grid(self, grid_k)


def regular_grid(region: Region, k: int) -> list[Location]:
    """k x k cell-center grid over a rectangle region.

    Points sit at cell centers with spacing side/k per axis, so no point lies
    on the boundary and the grid doubles as a candidate set of cells.
    """
    if region.rect is None:
        raise ValueError("regular_grid requires a rectangle region")
    if k < 2:
        raise ValueError(f"grid requires k >= 2, got {k}")
    xmin, ymin, xmax, ymax = region.rect
    xs = xmin + (xmax - xmin) * (np.arange(k) + 0.5) / k
    ys = ymin + (ymax - ymin) * (np.arange(k) + 0.5) / k
    return [Location(float(x), float(y)) for y in ys for x in xs]
