"""Axis-aligned boxes in R^N (N = 1, 2, 3) and the regions living inside them.

All measures here are exact: boxes, balls, annuli and boundary strips of a
box have closed-form volumes, which is the reason the package restricts
itself to boxes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n (omega_n)."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def unit_sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1}; equals 2 for n = 1."""
    return n * unit_ball_volume(n)


@dataclass(frozen=True)
class Domain:
    """Open box prod_d (lo_d, hi_d)."""

    bounds: tuple

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if not 1 <= len(b) <= 3:
            raise ValueError(f"dimension must be 1, 2 or 3, got {len(b)}")
        for lo, hi in b:
            if not hi > lo:
                raise ValueError(f"empty axis ({lo}, {hi})")
        object.__setattr__(self, "bounds", b)

    @classmethod
    def interval(cls, lo: float = 0.0, hi: float = 1.0) -> "Domain":
        return cls(((lo, hi),))

    @classmethod
    def unit(cls, dim: int) -> "Domain":
        return cls(((0.0, 1.0),) * dim)

    @classmethod
    def from_dict(cls, data: dict) -> "Domain":
        dom = cls(tuple(tuple(b) for b in data["bounds"]))
        if "dim" in data and int(data["dim"]) != dom.dim:
            raise ValueError("'dim' does not match the number of bounds")
        return dom

    def to_dict(self) -> dict:
        return {"dim": self.dim, "bounds": [list(b) for b in self.bounds]}

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([hi - lo for lo, hi in self.bounds])

    @property
    def lo(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    @property
    def hi(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def scaled(self, t: float) -> "Domain":
        """The dilated box t * Omega."""
        return Domain(tuple((t * lo, t * hi) for lo, hi in self.bounds))

    def contains(self, x, closed: bool = True) -> np.ndarray:
        x = _as_points(x, self.dim)
        if closed:
            inside = (x >= self.lo) & (x <= self.hi)
        else:
            inside = (x > self.lo) & (x < self.hi)
        return np.all(inside, axis=1)

    def boundary_distance(self, x) -> np.ndarray:
        """Euclidean distance to the boundary, for points inside the box."""
        x = _as_points(x, self.dim)
        return np.min(np.minimum(x - self.lo, self.hi - x), axis=1)

    def inner_box(self, eps: float) -> "Domain":
        """Complement of the closed eps-strip: prod (lo + eps, hi - eps)."""
        check_strip_width(self, eps)
        return Domain(tuple((lo + eps, hi - eps) for lo, hi in self.bounds))


def volume(domain: Domain) -> float:
    return float(np.prod(domain.lengths))


def boundary_measure(domain: Domain) -> float:
    """(N-1)-dimensional measure of the boundary; 2 (two endpoints) in 1D."""
    lengths = domain.lengths
    total = 0.0
    for d in range(domain.dim):
        total += 2.0 * float(np.prod(np.delete(lengths, d)))
    return total


def check_strip_width(domain: Domain, eps: float) -> None:
    if not 0.0 < eps < 0.5 * float(domain.lengths.min()):
        raise ValueError(
            f"strip width {eps} must lie in (0, {0.5 * domain.lengths.min()})"
        )


def strip_volume(domain: Domain, eps: float) -> float:
    """Exact measure of {x in Omega : dist(x, boundary) < eps}."""
    check_strip_width(domain, eps)
    return volume(domain) - float(np.prod(domain.lengths - 2.0 * eps))


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.ravel(self.center)))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)

    def volume(self) -> float:
        return unit_ball_volume(self.dim) * self.radius ** self.dim

    def doubled(self) -> "Ball":
        return Ball(self.center, 2.0 * self.radius)

    def inside(self, domain: Domain, strict: bool = True) -> bool:
        """True if the closed ball sits in the open box (compact containment)."""
        c = np.asarray(self.center)
        gap = np.minimum(c - domain.lo, domain.hi - c).min()
        return bool(gap > self.radius) if strict else bool(gap >= self.radius)


@dataclass(frozen=True)
class Annulus:
    """Open annulus {r < |x - a| < R}; inner radius 0 means a punctured ball."""

    center: tuple
    inner: float
    outer: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.ravel(self.center)))
        if not 0.0 <= self.inner < self.outer < math.inf:
            raise ValueError("annulus radii must satisfy 0 <= r < R < inf")

    @property
    def dim(self) -> int:
        return len(self.center)

    def volume(self) -> float:
        return unit_ball_volume(self.dim) * (self.outer ** self.dim - self.inner ** self.dim)

    def doubled(self) -> "Annulus":
        return Annulus(self.center, 0.5 * self.inner, 2.0 * self.outer)


@dataclass(frozen=True)
class BoundaryStrip:
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("strip width must be positive")


Region = Union[Ball, Annulus, BoundaryStrip]


def region_membership(x, region: Region, domain: Domain) -> np.ndarray:
    """Indicator of `region` at the points x (shape (n, N) or (N,))."""
    pts = _as_points(x, domain.dim)
    if not np.all(domain.contains(pts)):
        raise ValueError("points must lie in the domain")
    if isinstance(region, BoundaryStrip):
        check_strip_width(domain, region.width)
        return domain.boundary_distance(pts) < region.width
    r = np.linalg.norm(pts - np.asarray(region.center), axis=1)
    if isinstance(region, Ball):
        return r < region.radius
    if isinstance(region, Annulus):
        return (r > region.inner) & (r < region.outer)
    raise TypeError(f"unsupported region {type(region).__name__}")


def _as_points(x, dim: int) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts.reshape(-1, dim)
    if pts.shape[1] != dim:
        raise ValueError(f"expected points with {dim} coordinates, got {pts.shape}")
    return pts


def as_points(x, dim: int) -> np.ndarray:
    """Coerce scalars, single points or point arrays to shape (n, dim)."""
    return _as_points(x, dim)
