"""Mass densities: the concentration families, piecewise constants and a smooth
exponential profile.

Piecewise-constant densities are stored as a background value plus pairwise
disjoint regions (balls, sub-boxes, the boundary strip) carrying their own
values. Every functional (total mass, integral of a power, sup, inf) then has
a closed form. ``quadrature_integral`` recomputes the same integrals from
pointwise evaluation only and serves as the independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import integrate

from .geometry import (
    Ball,
    BoundaryStrip,
    Domain,
    as_points,
    check_strip_width,
    strip_volume,
    unit_ball_volume,
    volume,
)


class Density:
    """Common interface; concrete classes are frozen dataclasses with a ``domain``."""

    domain: Domain
    kind = "density"

    @property
    def dim(self) -> int:
        return self.domain.dim

    def evaluate(self, x) -> np.ndarray:
        raise NotImplementedError

    def power_integral(self, p: float) -> float:
        """Closed-form value of int rho^p over the domain."""
        raise NotImplementedError

    def sup(self) -> float:
        raise NotImplementedError

    def essential_inf(self) -> float:
        raise NotImplementedError

    def mass_terms(self) -> list:
        raise NotImplementedError

    def interfaces(self) -> list:
        """Regions across which the density may jump."""
        return []

    def scaled(self, c: float) -> "Density":
        return Scaled(self, c)

    def to_dict(self) -> dict:
        raise NotImplementedError


class PiecewiseDensity(Density):
    """Density equal to ``base`` except on disjoint regions with their own values."""

    def base_value(self) -> float:
        raise NotImplementedError

    def pieces(self) -> list:
        return []

    def evaluate(self, x) -> np.ndarray:
        pts = as_points(x, self.dim)
        if not np.all(self.domain.contains(pts)):
            raise ValueError("density evaluated outside its domain")
        out = np.full(pts.shape[0], self.base_value())
        for region, value in self.pieces():
            out = np.where(_inside(pts, region, self.domain), value, out)
        return out

    def power_integral(self, p: float) -> float:
        base = self.base_value()
        total = base ** p * volume(self.domain)
        for region, value in self.pieces():
            total += (value ** p - base ** p) * _region_volume(region, self.domain)
        return float(total)

    def sup(self) -> float:
        return max([self.base_value()] + [v for _, v in self.pieces()])

    def essential_inf(self) -> float:
        return min([self.base_value()] + [v for _, v in self.pieces()])

    def mass_terms(self) -> list:
        base = self.base_value()
        terms = [(base, None)]
        for region, value in self.pieces():
            if isinstance(region, BoundaryStrip):
                terms.extend((value - base, box) for box in strip_slabs(self.domain, region.width))
            else:
                terms.append((value - base, region))
        return terms

    def interfaces(self) -> list:
        return [region for region, _ in self.pieces()]


def _inside(pts: np.ndarray, region, domain: Domain) -> np.ndarray:
    if isinstance(region, BoundaryStrip):
        return domain.boundary_distance(pts) < region.width
    if isinstance(region, Ball):
        return np.linalg.norm(pts - np.asarray(region.center), axis=1) < region.radius
    if isinstance(region, Domain):
        return region.contains(pts, closed=False)
    raise TypeError(f"unsupported region {region!r}")


def _region_volume(region, domain: Domain) -> float:
    if isinstance(region, BoundaryStrip):
        return strip_volume(domain, region.width)
    if isinstance(region, Ball):
        return region.volume()
    return volume(region)


def strip_slabs(domain: Domain, width: float) -> list[Domain]:
    """The boundary strip of a box as 2N pairwise disjoint boxes."""
    check_strip_width(domain, width)
    slabs = []
    for d in range(domain.dim):
        for side in (0, 1):
            bounds = []
            for k, (lo, hi) in enumerate(domain.bounds):
                if k < d:
                    bounds.append((lo + width, hi - width))
                elif k == d:
                    bounds.append((lo, lo + width) if side == 0 else (hi - width, hi))
                else:
                    bounds.append((lo, hi))
            slabs.append(Domain(tuple(bounds)))
    return slabs


def _check_ball(ball: Ball, domain: Domain) -> None:
    if ball.dim != domain.dim:
        raise ValueError("ball and domain dimensions differ")
    if not ball.inside(domain, strict=True):
        raise ValueError(f"ball {ball} is not compactly contained in the domain")


def _boxes_disjoint(a: Domain, b: Domain) -> bool:
    return any(ha <= lb or hb <= la for (la, ha), (lb, hb) in zip(a.bounds, b.bounds))


def _regions_disjoint(a, b, domain: Domain) -> bool:
    if isinstance(a, BoundaryStrip) or isinstance(b, BoundaryStrip):
        other = b if isinstance(a, BoundaryStrip) else a
        if isinstance(other, BoundaryStrip):
            return False
        inner = domain.inner_box((a if isinstance(a, BoundaryStrip) else b).width)
        if isinstance(other, Ball):
            return other.inside(inner, strict=False)
        return all(lo >= il and hi <= ih for (lo, hi), (il, ih) in zip(other.bounds, inner.bounds))
    if isinstance(a, Ball) and isinstance(b, Ball):
        gap = np.linalg.norm(np.subtract(a.center, b.center))
        return bool(gap >= a.radius + b.radius)
    if isinstance(a, Domain) and isinstance(b, Domain):
        return _boxes_disjoint(a, b)
    ball, box = (a, b) if isinstance(a, Ball) else (b, a)
    c = np.asarray(ball.center)
    nearest = np.clip(c, box.lo, box.hi)
    return bool(np.linalg.norm(c - nearest) >= ball.radius)


@dataclass(frozen=True)
class Constant(PiecewiseDensity):
    domain: Domain
    c: float = 1.0
    kind = "constant"

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("constant density must be positive")

    def base_value(self) -> float:
        return float(self.c)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "c": self.c}


def _default_center(domain: Domain, center) -> tuple:
    return tuple(domain.center) if center is None else tuple(float(c) for c in np.ravel(center))


@dataclass(frozen=True)
class PointConcentration(PiecewiseDensity):
    """eps^(2m-N-delta) everywhere plus eps^-N on the ball B(center, eps)."""

    domain: Domain
    m: int
    eps: float
    delta: float = 0.1
    center: tuple | None = None
    kind = "point_concentration"

    def __post_init__(self):
        object.__setattr__(self, "center", _default_center(self.domain, self.center))
        if not 0.0 < self.delta < 0.5:
            raise ValueError("delta must lie in (0, 1/2)")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        _check_ball(self.ball, self.domain)

    @property
    def ball(self) -> Ball:
        return Ball(self.center, self.eps)

    def base_value(self) -> float:
        return self.eps ** (2 * self.m - self.dim - self.delta)

    def pieces(self) -> list:
        return [(self.ball, self.base_value() + self.eps ** (-self.dim))]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "eps": self.eps, "delta": self.delta, "center": list(self.center)}


@dataclass(frozen=True)
class TildeConcentration(PiecewiseDensity):
    """1 everywhere plus eps^(-2m+delta) on B(center, eps)."""

    domain: Domain
    m: int
    eps: float
    delta: float = 0.1
    center: tuple | None = None
    kind = "tilde_concentration"

    def __post_init__(self):
        object.__setattr__(self, "center", _default_center(self.domain, self.center))
        if not 0.0 < self.delta < 0.5:
            raise ValueError("delta must lie in (0, 1/2)")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        _check_ball(self.ball, self.domain)

    @property
    def ball(self) -> Ball:
        return Ball(self.center, self.eps)

    def base_value(self) -> float:
        return 1.0

    def pieces(self) -> list:
        return [(self.ball, 1.0 + self.eps ** (-2 * self.m + self.delta))]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "eps": self.eps, "delta": self.delta, "center": list(self.center)}


@dataclass(frozen=True)
class BoundaryStripWeyl(PiecewiseDensity):
    """eps^(-2m/N) on the eps-strip along the boundary, eps^(2-2m/N) elsewhere."""

    domain: Domain
    m: int
    eps: float
    kind = "boundary_strip"

    def __post_init__(self):
        check_strip_width(self.domain, self.eps)

    def base_value(self) -> float:
        return self.eps ** (2.0 - 2.0 * self.m / self.dim)

    def pieces(self) -> list:
        return [(BoundaryStrip(self.eps), self.eps ** (-2.0 * self.m / self.dim))]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "eps": self.eps}


@dataclass(frozen=True)
class SteklovFamily(PiecewiseDensity):
    """eps + 1/eps on the eps-strip along the boundary, eps elsewhere."""

    domain: Domain
    eps: float
    kind = "steklov"

    def __post_init__(self):
        check_strip_width(self.domain, self.eps)

    def base_value(self) -> float:
        return float(self.eps)

    def pieces(self) -> list:
        return [(BoundaryStrip(self.eps), self.eps + 1.0 / self.eps)]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "eps": self.eps}


@dataclass(frozen=True)
class MultiPoint(PiecewiseDensity):
    """eps everywhere plus eps^-N on each ball B(a_i, eps)."""

    domain: Domain
    eps: float
    centers: tuple
    kind = "multi_point"

    def __post_init__(self):
        cs = tuple(tuple(float(v) for v in np.ravel(c)) for c in self.centers)
        object.__setattr__(self, "centers", cs)
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        balls = self.balls
        for b in balls:
            _check_ball(b, self.domain)
        for i in range(len(balls)):
            for k in range(i + 1, len(balls)):
                if not _regions_disjoint(balls[i], balls[k], self.domain):
                    raise ValueError("concentration balls overlap")

    @property
    def balls(self) -> list[Ball]:
        return [Ball(c, self.eps) for c in self.centers]

    def base_value(self) -> float:
        return float(self.eps)

    def pieces(self) -> list:
        v = self.eps + self.eps ** (-self.dim)
        return [(b, v) for b in self.balls]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "eps": self.eps, "centers": [list(c) for c in self.centers]}


@dataclass(frozen=True)
class PiecewiseConstant(PiecewiseDensity):
    """Background value plus disjoint balls, sub-boxes or a boundary strip."""

    domain: Domain
    base: float
    regions: tuple = ()
    values: tuple = ()
    kind = "piecewise_constant"

    def __post_init__(self):
        regions = tuple(self.regions)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "regions", regions)
        object.__setattr__(self, "values", values)
        if len(regions) != len(values):
            raise ValueError("one value per region is required")
        if min((self.base,) + values) <= 0:
            raise ValueError("density values must be positive")
        for r in regions:
            if isinstance(r, Ball):
                _check_ball(r, self.domain)
            elif isinstance(r, BoundaryStrip):
                check_strip_width(self.domain, r.width)
            elif isinstance(r, Domain):
                if r.dim != self.dim or np.any(r.lo < self.domain.lo) or np.any(r.hi > self.domain.hi):
                    raise ValueError("sub-box must lie inside the domain")
            else:
                raise TypeError(f"unsupported region {r!r}")
        for i in range(len(regions)):
            for k in range(i + 1, len(regions)):
                if not _regions_disjoint(regions[i], regions[k], self.domain):
                    raise ValueError("regions overlap")

    def base_value(self) -> float:
        return float(self.base)

    def pieces(self) -> list:
        return list(zip(self.regions, self.values))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "base": self.base,
                "pieces": [dict(_region_to_dict(r), value=v) for r, v in self.pieces()]}


@dataclass(frozen=True)
class Exponential(Density):
    """Smooth density scale * exp(sum_d slope_d * t_d), t_d the normalised coordinate in [0, 1]."""

    domain: Domain
    scale: float = 1.0
    slopes: tuple = (1.0,)
    kind = "exponential"

    def __post_init__(self):
        s = tuple(float(v) for v in np.ravel(self.slopes))
        if len(s) == 1 and self.dim > 1:
            s = s * self.dim
        if len(s) != self.dim:
            raise ValueError("one slope per axis is required")
        object.__setattr__(self, "slopes", s)
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    def _raw(self, pts: np.ndarray) -> np.ndarray:
        t = (pts - self.domain.lo) / self.domain.lengths
        return self.scale * np.exp(t @ np.asarray(self.slopes))

    def evaluate(self, x) -> np.ndarray:
        pts = as_points(x, self.dim)
        if not np.all(self.domain.contains(pts)):
            raise ValueError("density evaluated outside its domain")
        return self._raw(pts)

    def power_integral(self, p: float) -> float:
        total = self.scale ** p
        for s, length in zip(self.slopes, self.domain.lengths):
            a = p * s
            total *= length * (math.expm1(a) / a if a != 0 else 1.0)
        return float(total)

    def sup(self) -> float:
        return self.scale * math.exp(sum(max(s, 0.0) for s in self.slopes))

    def essential_inf(self) -> float:
        return self.scale * math.exp(sum(min(s, 0.0) for s in self.slopes))

    def mass_terms(self) -> list:
        return [(1.0, self._raw)]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "scale": self.scale, "slopes": list(self.slopes)}


@dataclass(frozen=True)
class Scaled(Density):
    """The density c * inner."""

    inner: Density
    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("scaling factor must be positive")

    @property
    def domain(self) -> Domain:
        return self.inner.domain

    @property
    def kind(self) -> str:
        return self.inner.kind

    def evaluate(self, x) -> np.ndarray:
        return self.c * self.inner.evaluate(x)

    def power_integral(self, p: float) -> float:
        return self.c ** p * self.inner.power_integral(p)

    def sup(self) -> float:
        return self.c * self.inner.sup()

    def essential_inf(self) -> float:
        return self.c * self.inner.essential_inf()

    def mass_terms(self) -> list:
        return [(self.c * coef, region) for coef, region in self.inner.mass_terms()]

    def interfaces(self) -> list:
        return self.inner.interfaces()

    def to_dict(self) -> dict:
        return {"kind": "scaled", "c": self.c, "inner": self.inner.to_dict()}


def evaluate(rho: Density, x) -> np.ndarray:
    return rho.evaluate(x)


def _check_domain(rho: Density, domain: Domain | None) -> None:
    if domain is not None and domain != rho.domain:
        raise ValueError("density is defined on a different domain")


def mass(rho: Density, domain: Domain | None = None) -> float:
    _check_domain(rho, domain)
    return rho.power_integral(1.0)


def lp_norm(rho: Density, domain: Domain | None = None, p: float = 1.0) -> tuple[float, float]:
    """(||rho||_p, int rho^p), both returned because bounds use the raw integral."""
    if not p > 0:
        raise ValueError("p must be positive")
    _check_domain(rho, domain)
    raw = rho.power_integral(p)
    return raw ** (1.0 / p), raw


def sup_norm(rho: Density, domain: Domain | None = None) -> float:
    _check_domain(rho, domain)
    return rho.sup()


def weyl_integral(rho: Density, m: int) -> float:
    """int rho^(N/2m), the functional entering Weyl-type bounds."""
    return rho.power_integral(rho.dim / (2.0 * m))


def with_eps(rho: Density, eps: float) -> Density:
    """Same family member at a different concentration parameter."""
    if isinstance(rho, Scaled):
        return Scaled(with_eps(rho.inner, eps), rho.c)
    if not hasattr(rho, "eps"):
        return rho
    return replace(rho, eps=eps)


# ---------------------------------------------------------------- quadrature


def _axis_breaks(region, domain: Domain, axis: int, prev: np.ndarray) -> list[float]:
    if isinstance(region, Ball):
        c = np.asarray(region.center)
        d2 = region.radius ** 2 - float(np.sum((prev - c[:axis]) ** 2))
        if d2 <= 0:
            return []
        h = math.sqrt(d2)
        return [c[axis] - h, c[axis] + h]
    if isinstance(region, BoundaryStrip):
        lo, hi = domain.bounds[axis]
        return [lo + region.width, hi - region.width]
    if isinstance(region, Domain):
        return list(region.bounds[axis])
    return []


def quadrature_integral(rho: Density, p: float = 1.0, rtol: float = 1e-10, gauss: int = 12) -> float:
    """int rho^p from pointwise evaluation only, by iterated 1D integration.

    The innermost axis is split at every analytic jump and integrated with a
    Gauss rule per piece; outer axes use adaptive quadrature with the same
    jump locations passed as breakpoints.
    """
    domain = rho.domain
    dim = domain.dim
    regions = rho.interfaces()
    xg, wg = np.polynomial.legendre.leggauss(gauss)

    def cuts(axis, prev):
        lo, hi = domain.bounds[axis]
        pts = {lo, hi}
        for r in regions:
            pts.update(t for t in _axis_breaks(r, domain, axis, prev) if lo < t < hi)
        return sorted(pts)

    def line(prev):
        br = np.array(cuts(dim - 1, prev))
        a, b = br[:-1], br[1:]
        x = (0.5 * (b - a))[:, None] * xg[None, :] + (0.5 * (a + b))[:, None]
        w = (0.5 * (b - a))[:, None] * wg[None, :]
        pts = np.column_stack([np.broadcast_to(prev, (x.size, dim - 1)), x.ravel()])
        return float(np.sum(w.ravel() * rho.evaluate(pts) ** p))

    def level(axis, prev):
        if axis == dim - 1:
            return line(prev)
        br = cuts(axis, prev)
        total = 0.0
        for a, b in zip(br[:-1], br[1:]):
            inner = [t for t in cuts(axis, prev) if a < t < b]
            val, _ = integrate.quad(lambda t: level(axis + 1, np.append(prev, t)), a, b,
                                    points=inner or None, epsabs=0.0, epsrel=rtol, limit=200)
            total += val
        return total

    return level(0, np.zeros(0))


# ---------------------------------------------------------------- config


def _region_to_dict(region) -> dict:
    if isinstance(region, Ball):
        return {"ball": {"center": list(region.center), "radius": region.radius}}
    if isinstance(region, BoundaryStrip):
        return {"strip": region.width}
    return {"box": [list(b) for b in region.bounds]}


def _region_from_dict(data: dict):
    if "ball" in data:
        return Ball(tuple(data["ball"]["center"]), float(data["ball"]["radius"]))
    if "strip" in data:
        return BoundaryStrip(float(data["strip"]))
    if "box" in data:
        return Domain(tuple(tuple(b) for b in data["box"]))
    raise ValueError(f"unknown region {data!r}")


def density_from_config(data: dict, domain: Domain, m: int) -> Density:
    """Build a density from {"kind": ..., parameters} (or {"density": {...}})."""
    data = data.get("density", data)
    kind = data["kind"]
    if kind == "constant":
        return Constant(domain, float(data.get("c", 1.0)))
    if kind == "point_concentration":
        return PointConcentration(domain, m, float(data["eps"]), float(data.get("delta", 0.1)), data.get("center"))
    if kind == "tilde_concentration":
        return TildeConcentration(domain, m, float(data["eps"]), float(data.get("delta", 0.1)), data.get("center"))
    if kind == "boundary_strip":
        return BoundaryStripWeyl(domain, m, float(data["eps"]))
    if kind == "steklov":
        return SteklovFamily(domain, float(data["eps"]))
    if kind == "multi_point":
        return MultiPoint(domain, float(data["eps"]), tuple(tuple(c) for c in data["centers"]))
    if kind == "piecewise_constant":
        pieces = data.get("pieces", [])
        return PiecewiseConstant(domain, float(data["base"]),
                                 tuple(_region_from_dict(p) for p in pieces),
                                 tuple(float(p["value"]) for p in pieces))
    if kind == "exponential":
        return Exponential(domain, float(data.get("scale", 1.0)), tuple(np.ravel(data.get("slopes", [1.0]))))
    raise ValueError(f"unknown density kind {kind!r}")


def catalog(domain: Domain, m: int, eps: float, delta: float = 0.1) -> list[Density]:
    """One member of every family at concentration parameter eps."""
    n = domain.dim
    c = domain.center
    offset = np.zeros(n)
    offset[0] = 0.25 * domain.lengths[0]
    out = [
        Constant(domain, 1.0),
        PointConcentration(domain, m, eps, delta),
        TildeConcentration(domain, m, eps, delta),
        BoundaryStripWeyl(domain, m, eps),
        SteklovFamily(domain, eps),
        MultiPoint(domain, eps, (tuple(c - offset), tuple(c + offset))),
        Exponential(domain, 1.0, (1.0,) * n),
    ]
    return out
