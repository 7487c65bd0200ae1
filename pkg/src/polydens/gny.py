"""Splitting (Omega, |.|, rho dx) into j annuli of comparable measure whose
doubles are pairwise disjoint, with a greedy search over a sampled measure.

The measure is represented by weighted sample points (subcell midpoints of a
grid graded towards the density's interfaces). Regions are open annuli
{r < |x - a| < R} or balls (r = 0); a region's double is {r/2 < |x - a| < 2R}.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .discretization import graded_breaks
from .geometry import Annulus, Ball, BoundaryStrip, Domain, unit_ball_volume, volume

log = logging.getLogger(__name__)


@dataclass
class MeasureSpace:
    domain: Domain
    points: np.ndarray
    weights: np.ndarray
    candidates: np.ndarray
    sup_density: float
    exact_total: float | None = None

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise ValueError("sample weights must be positive")

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def measure(self, region) -> float:
        return float(self.weights[_members(self.points, region)].sum())

    def sorted_from(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Distances from candidate i in ascending order and the cumulative weights."""
        cache = self.__dict__.setdefault("_sorted", {})
        if i not in cache:
            dist = np.linalg.norm(self.points - self.candidates[i], axis=1)
            order = np.argsort(dist, kind="stable")
            cache[i] = (dist[order], np.cumsum(self.weights[order]))
        return cache[i]


def _members(points: np.ndarray, region) -> np.ndarray:
    d = np.linalg.norm(points - np.asarray(region.center), axis=1)
    if isinstance(region, Ball):
        return d < region.radius
    return (d > region.inner) & (d < region.outer)


def feature_intervals(rho, axis: int) -> list[tuple[float, float]]:
    lo, hi = rho.domain.bounds[axis]
    out = []
    for reg in rho.interfaces():
        if isinstance(reg, Ball):
            c = reg.center[axis]
            out.append((c - reg.radius, c + reg.radius))
        elif isinstance(reg, BoundaryStrip):
            out += [(lo, lo + reg.width), (hi - reg.width, hi)]
        elif isinstance(reg, Domain):
            out.append(reg.bounds[axis])
    return out


def measure_space(rho, cells: int = 32, sub: int = 4, max_candidates: int = 400) -> MeasureSpace:
    """Weighted subcell midpoints on a grid graded towards the interfaces of rho."""
    domain = rho.domain
    axes_mid, axes_w, centers = [], [], []
    for d, (lo, hi) in enumerate(domain.bounds):
        br = graded_breaks(lo, hi, feature_intervals(rho, d), (hi - lo) / cells)
        h = np.diff(br)
        t = (np.arange(sub) + 0.5) / sub
        axes_mid.append((br[:-1, None] + h[:, None] * t[None, :]).ravel())
        axes_w.append(np.repeat(h / sub, sub))
        centers.append(0.5 * (br[:-1] + br[1:]))
    pts = np.stack([g.ravel() for g in np.meshgrid(*axes_mid, indexing="ij")], axis=1)
    vol = np.prod(np.stack([g.ravel() for g in np.meshgrid(*axes_w, indexing="ij")], axis=1), axis=1)
    weights = vol * rho.evaluate(pts)
    cand = np.stack([g.ravel() for g in np.meshgrid(*centers, indexing="ij")], axis=1)
    if cand.shape[0] > max_candidates:
        stride = int(math.ceil(cand.shape[0] / max_candidates))
        cand = cand[::stride]
    return MeasureSpace(domain, pts, weights, cand, float(rho.sup()), float(rho.power_integral(1.0)))


def uniform_measure_space(domain: Domain, value: float = 1.0, cells: int = 32, sub: int = 2) -> MeasureSpace:
    from .density import Constant

    return measure_space(Constant(domain, value), cells, sub)


@dataclass
class Decomposition:
    regions: list
    measures: list
    c_emp: float
    disjoint: bool
    theta: float = float("nan")
    complete: bool = True

    def to_dict(self) -> dict:
        return {
            "centers": [list(r.center) for r in self.regions],
            "radii": [[_inner(r), _outer(r)] for r in self.regions],
            "measures": [float(f"{v:.17g}") for v in self.measures],
            "c_emp": float(f"{self.c_emp:.17g}"),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _inner(region) -> float:
    return 0.0 if isinstance(region, Ball) else float(region.inner)


def _outer(region) -> float:
    return float(region.radius) if isinstance(region, Ball) else float(region.outer)


def _double(region) -> tuple[np.ndarray, float, float]:
    return np.asarray(region.center), 0.5 * _inner(region), 2.0 * _outer(region)


def doubles_disjoint(a, b) -> bool:
    """Euclidean disjointness of the doubled regions."""
    ca, ra, Ra = _double(a)
    cb, rb, Rb = _double(b)
    d = float(np.linalg.norm(ca - cb))
    return d >= Ra + Rb or d + Rb <= ra or d + Ra <= rb


def _region(center: np.ndarray, r: float, R: float):
    return Ball(tuple(center), float(R)) if r == 0 else Annulus(tuple(center), float(r), float(R))


def _constraint(x: np.ndarray, r: float, dbl: list) -> float:
    """Largest outer radius whose double avoids every claimed double not encircled by r/2."""
    rmax = math.inf
    for c, rho_k, P in dbl:
        dk = float(np.linalg.norm(c - x))
        if 2.0 * (dk + P) <= r:
            continue
        rmax = min(rmax, 0.5 * max(dk - P, rho_k - dk))
    return rmax


def _best_region(ms: MeasureSpace, claimed: list, target: float):
    """Smallest outer radius region reaching ``target`` over all candidate centers."""
    best = None
    dbl = [_double(c) for c in claimed]
    for i, x in enumerate(ms.candidates):
        ds, cum = ms.sorted_from(i)
        # inner radii that encircle a growing set of claimed doubles
        enc = sorted(2.0 * (float(np.linalg.norm(c - x)) + P) for c, _, P in dbl)
        for r in [0.0] + enc:
            rmax = _constraint(x, r, dbl)
            if rmax <= r:
                continue
            start = int(np.searchsorted(ds, r, side="right"))
            before = cum[start - 1] if start > 0 else 0.0
            k = int(np.searchsorted(cum, before + target))
            if k >= cum.size:
                continue
            nxt = ds[k + 1] if k + 1 < ds.size else 2.0 * ds[k] + 1e-12
            R = 0.5 * (ds[k] + nxt) if nxt > ds[k] else ds[k] * (1 + 1e-12)
            if R > rmax or R <= r:
                continue
            if best is None or R < best[2]:
                best = (x.copy(), r, R)
            break
    return best


def _grow(ms: MeasureSpace, regions: list) -> list:
    """Enlarge each outer radius as far as disjointness of the doubles allows."""
    corners = np.array(np.meshgrid(*ms.domain.bounds, indexing="ij")).reshape(ms.dim, -1).T
    out = list(regions)
    for i, reg in enumerate(out):
        x = np.asarray(reg.center)
        others = [_double(o) for k, o in enumerate(out) if k != i]
        r = _inner(reg)
        reach = float(np.max(np.linalg.norm(corners - x, axis=1))) * (1 + 1e-9)
        R = min(_constraint(x, r, others) * (1 - 1e-9), reach)
        if R > _outer(reg):
            out[i] = _region(x, r, R)
    return out


def decompose(ms: MeasureSpace, j: int, theta: float = 0.5, min_theta: float = 1.0 / 256,
              volume_filter: bool = False) -> Decomposition:
    """Greedy decomposition into j regions with pairwise disjoint doubles.

    Each step claims the smallest region of measure >= theta * nu(X) / j whose
    double avoids every earlier double; regions encircling an earlier double
    become annuli. When a step fails the whole search restarts with theta
    halved. Finally every region is grown as far as disjointness allows. With ``volume_filter`` 2j regions are built and the j with the
    smallest doubled volume (preferring |2A| <= |Omega|/j) are kept.
    """
    if j < 1:
        raise ValueError("j must be >= 1")
    count = 2 * j if volume_filter else j
    total = ms.total
    best_partial: Decomposition | None = None
    th = theta
    while th >= min_theta:
        claimed = []
        target = th * total / count
        for _ in range(count):
            found = _best_region(ms, claimed, target)
            if found is None:
                break
            claimed.append(_region(*found))
        meas = [ms.measure(r) for r in claimed]
        c_emp = min(meas) * count / total if meas else 0.0
        dec = Decomposition(claimed, meas, c_emp, True, th, len(claimed) == count)
        if dec.complete:
            dec.regions = _grow(ms, claimed)
            dec.measures = [ms.measure(r) for r in dec.regions]
            if volume_filter:
                dec = _filter_by_volume(dec, ms, j)
            else:
                dec.c_emp = min(dec.measures) * j / total
            return dec
        if best_partial is None or len(claimed) > len(best_partial.regions):
            best_partial = dec
        log.info("greedy decomposition failed at theta=%.4g; halving", th)
        th *= 0.5
    log.warning("could not place %d regions", count)
    return best_partial


def _filter_by_volume(dec: Decomposition, ms: MeasureSpace, j: int) -> Decomposition:
    vol = [unit_ball_volume(ms.dim) * (_outer(r) * 2) ** ms.dim for r in dec.regions]
    order = np.argsort(vol, kind="stable")[:j]
    regions = [dec.regions[i] for i in order]
    meas = [dec.measures[i] for i in order]
    ok = all(vol[i] <= volume(ms.domain) / j for i in order)
    return Decomposition(regions, meas, min(meas) * j / ms.total, True, dec.theta, ok)


def radius_floor(ms: MeasureSpace, j: int, c: float) -> float:
    """Right-hand side of r^N >= c nu(X) / (2^(N+1) j omega_N sup rho), as a radius."""
    n = ms.dim
    val = c * ms.total / (2 ** (n + 1) * j * unit_ball_volume(n) * ms.sup_density)
    return val ** (1.0 / n)


def inner_radius_bound(ms: MeasureSpace, j: int, c: float) -> float:
    """1/2 inf{r : V(r) >= c nu(X)/j}, V(r) the largest measure of a ball centred at a sample point."""
    v = c * ms.total / j
    best = math.inf
    for i in range(ms.candidates.shape[0]):
        ds, cum = ms.sorted_from(i)
        k = int(np.searchsorted(cum, v))
        if k < cum.size:
            best = min(best, float(ds[k]))
    return 0.5 * best


@dataclass
class VerifyReport:
    clauses: dict = field(default_factory=dict)
    c_emp: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.clauses.values())


def verify(d: Decomposition, ms: MeasureSpace, j: int, c_min: float = 0.0) -> VerifyReport:
    """Recompute every claim of a decomposition and report each clause."""
    rep = VerifyReport()
    rep.clauses["count"] = len(d.regions) == j
    euclid = all(doubles_disjoint(d.regions[a], d.regions[b])
                 for a in range(len(d.regions)) for b in range(a + 1, len(d.regions)))
    rep.clauses["disjoint_doubles"] = euclid
    meas = [ms.measure(r) for r in d.regions]
    rep.c_emp = min(meas) * j / ms.total if meas else 0.0
    rep.clauses["positive_measure"] = bool(meas) and min(meas) > 0
    rep.clauses["measure_bound"] = bool(meas) and rep.c_emp > c_min and all(
        v >= rep.c_emp * ms.total / j * (1 - 1e-12) for v in meas)
    rep.clauses["measures_match"] = np.allclose(meas, d.measures, rtol=1e-12, atol=0) if meas else False
    floor = radius_floor(ms, j, rep.c_emp)
    radii = [_outer(r) if _inner(r) == 0 else _inner(r) for r in d.regions]
    rep.clauses["radius_estimate"] = bool(radii) and all(r >= floor for r in radii)
    return rep
