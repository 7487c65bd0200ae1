"""Parameter sweeps over concentration families, log-log rate fits, the
boundary-concentration (Steklov) comparison, Taylor remainder checks on
small balls, and CSV/JSON output.
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .bounds import BoundKind, make_report, uniformity_verdict, verdict_note
from .density import Density, density_from_config, weyl_integral, with_eps
from .discretization import (
    assemble_boundary_mass,
    assemble_mass,
    assemble_stiffness,
    build_space,
    graded_breaks,
    multi_indices,
    refine,
)
from .geometry import Ball, BoundaryStrip, Domain, boundary_measure, volume
from .gny import feature_intervals
from .spectrum import SolverConfig, Spectrum, kernel_dimension, kernel_size, solve_generalized

log = logging.getLogger(__name__)

REFINE_TOL = 0.02
MIN_FIT_POINTS = 5
# "refine": solve on the graded mesh and on its dyadic refinement, report the refined one;
# "coarsen": solve on the graded mesh and on one with half the far-field cells;
# "none": no discretization check
CHECK_MODES = ("refine", "coarsen", "none")


def default_ladder(dim: int) -> list[float]:
    if dim == 3:
        return list(np.geomspace(1e-1, 3e-3, 6))
    return list(np.geomspace(1e-1, 1e-3, 8))


@dataclass
class ExperimentConfig:
    domain: Domain
    m: int
    density: dict
    eps: list[float]
    cells: int = 16
    degree: int | None = None
    k: int = 6
    kinds: list[str] = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    out: str | None = None
    cells_per_feature: int = 4
    check: str = "refine"
    growth: float = 1.3
    ball_depth: int = 3

    def __post_init__(self):
        self.eps = [float(e) for e in self.eps]
        if not self.eps:
            raise ValueError("empty eps ladder")
        if any(b >= a for a, b in zip(self.eps, self.eps[1:])):
            raise ValueError("eps ladder must be strictly decreasing")
        if self.cells_per_feature < 4:
            raise ValueError("at least 4 cells across each ball or strip are required")
        if self.cells < 2:
            raise ValueError("cells must be >= 2")
        if self.check not in CHECK_MODES:
            raise ValueError(f"check must be one of {CHECK_MODES}")
        if not self.growth > 1:
            raise ValueError("growth must exceed 1")
        self.kinds = [BoundKind(k).value for k in self.kinds]

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        domain = Domain.from_dict(data.pop("domain")) if "domain" in data else Domain.unit(int(data.pop("dim", 1)))
        m = int(data.pop("m"))
        density = data.pop("density", {"kind": "constant"})
        eps = data.pop("eps", None) or default_ladder(domain.dim)
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        return cls(domain, m, density, eps, **data)

    def to_dict(self) -> dict:
        return {
            "domain": self.domain.to_dict(), "m": self.m, "density": self.density, "eps": self.eps,
            "cells": self.cells, "degree": self.degree, "k": self.k, "kinds": self.kinds,
            "tolerances": self.tolerances, "seed": self.seed, "cells_per_feature": self.cells_per_feature,
            "check": self.check, "growth": self.growth, "ball_depth": self.ball_depth,
        }

    def density_at(self, eps: float) -> Density:
        return density_from_config({**self.density, "eps": eps}, self.domain, self.m)


# ------------------------------------------------------------------ spaces


def graded_space(rho: Density, m: int, cells: int, degree: int | None = None,
                 cells_per_feature: int = 4, bc: str = "natural", growth: float = 1.3):
    """Spline space whose breaks snap to and grade towards the interfaces of rho."""
    domain = rho.domain
    breaks = []
    for d, (lo, hi) in enumerate(domain.bounds):
        breaks.append(graded_breaks(lo, hi, feature_intervals(rho, d), (hi - lo) / cells, cells_per_feature,
                                    growth))
    space = build_space(domain, m, bc=bc, degree=degree, breaks=breaks)
    check_resolution(space, rho, cells_per_feature)
    return space


def check_resolution(space, rho: Density, cells_per_feature: int = 4) -> None:
    """Raise unless every ball or strip of rho spans >= cells_per_feature cells per axis."""
    for d, basis in enumerate(space.bases):
        br = np.asarray(basis.breaks)
        for a, b in feature_intervals(rho, d):
            n = int(np.sum((br[:-1] >= a - 1e-12) & (br[1:] <= b + 1e-12)))
            if n < cells_per_feature:
                raise ValueError(f"feature ({a:.3g}, {b:.3g}) on axis {d} has {n} cells, "
                                 f"need {cells_per_feature}")


def solve_density(rho: Density, m: int, k: int, space=None, cells: int = 16, degree: int | None = None,
                  seed: int = 0, ball_depth: int = 3, check_kernel: bool = True) -> Spectrum:
    """Lowest k eigenpairs of the Neumann problem with density rho."""
    space = space or graded_space(rho, m, cells, degree)
    K = assemble_stiffness(space)
    M = assemble_mass(space, rho, depth=ball_depth)
    # shift proportional to 1/mass keeps K + sM exactly homogeneous under rho -> c rho
    cfg = SolverConfig(shift=1.0 / rho.power_integral(1.0), seed=seed)
    s = solve_generalized(K, M, min(k, space.ndof), cfg, dim=space.dim)
    if check_kernel:
        kernel_dimension(s, space.dim, m)
    return s


# ------------------------------------------------------------------ sweeps


@dataclass
class SweepPoint:
    eps: float
    eigenvalues: np.ndarray
    residuals: np.ndarray
    kernel_count: int
    mass: float
    lp: float
    sup: float
    coarse: np.ndarray | None = None
    ndof: int = 0

    def change(self, j: int) -> float:
        """Relative change of mu_j between the base mesh and its refinement."""
        if self.coarse is None:
            return 0.0
        fine, coarse = self.eigenvalues[j - 1], self.coarse[j - 1]
        return abs(coarse - fine) / abs(fine) if fine != 0 else math.inf

    def flagged(self, j: int) -> bool:
        return self.change(j) > REFINE_TOL


@dataclass
class SweepResult:
    config: ExperimentConfig
    points: list[SweepPoint] = field(default_factory=list)
    complete: bool = True

    @property
    def eps(self) -> np.ndarray:
        return np.array([p.eps for p in self.points])

    def mu(self, j: int) -> np.ndarray:
        return np.array([p.eigenvalues[j - 1] for p in self.points])

    def rows(self) -> list[list]:
        out = []
        for p in self.points:
            for j, mu in enumerate(p.eigenvalues, start=1):
                out.append([p.eps, j, mu, p.mass, p.lp, p.sup])
        return out

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "complete": self.complete,
            "points": [
                {"eps": p.eps, "eigenvalues": [float(v) for v in p.eigenvalues],
                 "residuals": [float(v) for v in p.residuals], "kernel_count": p.kernel_count,
                 "mass": p.mass, "lp": p.lp, "sup": p.sup, "ndof": p.ndof,
                 "refinement_change": [p.change(j) for j in range(1, len(p.eigenvalues) + 1)]}
                for p in self.points
            ],
        }


def sweep_point(rho: Density, cfg: ExperimentConfig) -> SweepPoint:
    base = graded_space(rho, cfg.m, cfg.cells, cfg.degree, cfg.cells_per_feature, growth=cfg.growth)
    coarse = None
    space, depth = base, cfg.ball_depth
    if cfg.check == "refine":
        # one extra subdivision level on the base mesh makes both ball
        # quadratures use the same subcells, so the two spaces stay nested
        coarse = solve_density(rho, cfg.m, cfg.k, base, seed=cfg.seed, ball_depth=depth + 1).eigenvalues
        space = refine(base)
    elif cfg.check == "coarsen":
        other = graded_space(rho, cfg.m, max(2, cfg.cells // 2), cfg.degree, cfg.cells_per_feature,
                             growth=cfg.growth)
        coarse = solve_density(rho, cfg.m, cfg.k, other, seed=cfg.seed, ball_depth=depth).eigenvalues
    s = solve_density(rho, cfg.m, cfg.k, space, seed=cfg.seed, ball_depth=depth)
    return SweepPoint(rho.eps if hasattr(rho, "eps") else float("nan"), s.eigenvalues, s.residuals,
                      s.kernel_count, rho.power_integral(1.0), weyl_integral(rho, cfg.m), rho.sup(),
                      coarse, space.ndof)


def run_sweep(cfg: ExperimentConfig, fmt: str = "csv") -> SweepResult:
    """One solve per eps, in ladder order. On failure the partial result is written out and the error re-raised."""
    result = SweepResult(cfg)
    for eps in cfg.eps:
        try:
            pt = sweep_point(cfg.density_at(eps), cfg)
        except Exception:
            result.complete = False
            if cfg.out:
                emit(result, cfg.out, fmt)
            raise
        pt.eps = eps
        log.info("eps=%.4g mu=%s", eps, np.array2string(pt.eigenvalues, precision=6))
        result.points.append(pt)
    if cfg.out:
        emit(result, cfg.out, fmt)
    return result


@dataclass
class RateFit:
    slope: float
    intercept: float
    r2: float
    j: int
    used: list[float] = field(default_factory=list)
    excluded: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)

    def row(self) -> list:
        return [self.j, self.slope, self.intercept, self.r2]

    def to_dict(self) -> dict:
        return {"j": self.j, "slope": self.slope, "intercept": self.intercept, "r2": self.r2,
                "used": self.used, "excluded": self.excluded, "residuals": self.residuals}


def fit_loglog(x: Sequence[float], y: Sequence[float], j: int = 0) -> RateFit:
    """Unweighted least squares of log y against log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    res = ly - (slope * lx + intercept)
    ss = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(res ** 2)) / ss if ss > 0 else 1.0
    return RateFit(float(slope), float(intercept), r2, j, list(map(float, x)), [], list(map(float, res)))


def fit_rate(s: SweepResult, j: int, min_points: int = MIN_FIT_POINTS) -> RateFit:
    """Slope of log mu_j against log eps over the points not flagged by refinement."""
    mu = s.mu(j)
    if np.any(mu <= 0):
        raise ValueError(f"nonpositive mu_{j} in sweep")
    keep = [i for i, p in enumerate(s.points) if not p.flagged(j)]
    excluded = [float(s.points[i].eps) for i in range(len(s.points)) if i not in keep]
    if len(keep) < min_points:
        raise ValueError(f"only {len(keep)} unflagged points for j={j}, need {min_points}")
    fit = fit_loglog(s.eps[keep], mu[keep], j)
    fit.excluded = excluded
    return fit


def bound_reports(s: SweepResult, j_values: Sequence[int] | None = None) -> list:
    """BoundReports for every configured kind, strict=False so counterexample families can be shown."""
    cfg = s.config
    n = cfg.domain.dim
    vol = volume(cfg.domain)
    d = kernel_size(n, cfg.m)
    out = []
    for kind in cfg.kinds:
        kind = BoundKind(kind)
        js = [d + 1] if kind.is_lower else (j_values or range(d + 1, len(s.points[0].eigenvalues) + 1))
        for p in s.points:
            for j in js:
                out.append(make_report(kind, n, cfg.m, j, p.eps, float(p.eigenvalues[j - 1]),
                                       p.mass, p.lp, p.sup, vol, strict=False))
    return out


def verdicts(reports: list) -> list[dict]:
    out = []
    for kind in dict.fromkeys(r.kind for r in reports):
        for j in sorted({r.j for r in reports if r.kind is kind}):
            sel = [r for r in reports if r.kind is kind and r.j == j]
            n, m = sel[0].N, sel[0].m
            out.append({"kind": kind.value, "j": j, "verdict": uniformity_verdict(sel),
                        "note": verdict_note(kind, n, m)})
    return out


# ------------------------------------------------------------------ Steklov


def steklov_eigenvalues(space, count: int) -> np.ndarray:
    """Lowest eigenvalues of K u = sigma B u, B the boundary mass.

    Only rows where B is nonzero carry finite eigenvalues; the interior block
    is eliminated by a Schur complement.
    """
    K = assemble_stiffness(space).toarray()
    B = assemble_boundary_mass(space).toarray()
    bnd = np.flatnonzero(np.any(np.abs(B) > 0, axis=1))
    inn = np.setdiff1d(np.arange(K.shape[0]), bnd)
    if count > bnd.size:
        raise ValueError(f"only {bnd.size} Steklov eigenvalues exist on this space, asked for {count}")
    kbb = K[np.ix_(bnd, bnd)]
    if inn.size:
        kbi = K[np.ix_(bnd, inn)]
        kib = K[np.ix_(inn, bnd)]
        kii = K[np.ix_(inn, inn)]
        kbb = kbb - kbi @ sla.solve(kii, kib, assume_a="sym")
    vals = sla.eigh(0.5 * (kbb + kbb.T), B[np.ix_(bnd, bnd)], eigvals_only=True)
    return np.sort(vals)[:count]


@dataclass
class SteklovTable:
    sigma: np.ndarray
    perimeter: float
    eps: list[float]
    mu: np.ndarray

    def gaps(self, scaled: bool = True) -> np.ndarray:
        ref = self.perimeter * self.sigma if scaled else self.sigma
        return np.abs(self.mu - ref[None, :])

    def rows(self) -> list[list]:
        g, gu = self.gaps(True), self.gaps(False)
        out = []
        for i, e in enumerate(self.eps):
            for j in range(self.sigma.size):
                out.append([e, j + 1, self.mu[i, j], self.perimeter * self.sigma[j], self.sigma[j],
                            g[i, j], gu[i, j]])
        return out


STEKLOV_HEADER = ["eps", "j", "mu_j", "perimeter_sigma_j", "sigma_j", "gap_scaled", "gap_unscaled"]


def steklov_compare(domain: Domain, m: int, eps_values: Sequence[float], j_max: int, cells: int = 16,
                    degree: int | None = None, seed: int = 0) -> SteklovTable:
    """mu_j for the boundary-strip family next to Steklov eigenvalues on a fine uniform space."""
    from .density import SteklovFamily

    fine = build_space(domain, m, elements=4 * cells if domain.dim == 1 else cells, degree=degree)
    sigma = steklov_eigenvalues(fine, j_max)
    mus = []
    for eps in eps_values:
        rho = SteklovFamily(domain, eps)
        s = solve_density(rho, m, max(j_max, kernel_size(domain.dim, m) + 1), cells=cells, degree=degree,
                          seed=seed)
        mus.append(s.eigenvalues[:j_max])
    return SteklovTable(sigma, boundary_measure(domain), list(map(float, eps_values)), np.array(mus))


# ------------------------------------------------------------------ Taylor remainders


def ball_quadrature(N: int, radius: float = 1.0, n: int = 24) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights on the ball B(0, radius) in R^N, N <= 3."""
    g, w = np.polynomial.legendre.leggauss(n)
    r = 0.5 * (g + 1.0)
    wr = 0.5 * w
    if N == 1:
        return (radius * g)[:, None], radius * w
    if N == 2:
        nt = 2 * n
        th = 2 * np.pi * np.arange(nt) / nt
        R, T = np.meshgrid(r, th, indexing="ij")
        W = np.outer(wr * r, np.full(nt, 2 * np.pi / nt))
        pts = np.stack([R.ravel() * np.cos(T.ravel()), R.ravel() * np.sin(T.ravel())], axis=1)
        return radius * pts, radius ** 2 * W.ravel()
    if N == 3:
        nt = 2 * n
        ph = 2 * np.pi * np.arange(nt) / nt
        R, C, P = np.meshgrid(r, g, ph, indexing="ij")
        W = (wr * r ** 2)[:, None, None] * w[None, :, None] * np.full(nt, 2 * np.pi / nt)[None, None, :]
        S = np.sqrt(1.0 - C ** 2)
        pts = np.stack([(R * S * np.cos(P)).ravel(), (R * S * np.sin(P)).ravel(), (R * C).ravel()], axis=1)
        return radius * pts, radius ** 3 * W.ravel()
    raise ValueError("ball quadrature is implemented for N <= 3")


def box_quadrature(domain: Domain, n: int = 24, pieces: int = 4) -> tuple[np.ndarray, np.ndarray]:
    g, w = np.polynomial.legendre.leggauss(n)
    axes, weights = [], []
    for lo, hi in domain.bounds:
        br = np.linspace(lo, hi, pieces + 1)
        h = np.diff(br)
        axes.append((0.5 * (br[:-1] + br[1:])[:, None] + 0.5 * h[:, None] * g[None, :]).ravel())
        weights.append((0.5 * h[:, None] * w[None, :]).ravel())
    pts = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=1)
    wts = np.prod(np.stack([a.ravel() for a in np.meshgrid(*weights, indexing="ij")], axis=1), axis=1)
    return pts, wts


def _polyval(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    P = np.polynomial.polynomial
    n = coeffs.ndim
    if n == 1:
        return P.polyval(x[:, 0], coeffs)
    if n == 2:
        return P.polyval2d(x[:, 0], x[:, 1], coeffs)
    if n == 3:
        return P.polyval3d(x[:, 0], x[:, 1], x[:, 2], coeffs)
    raise ValueError("polynomials are supported for N <= 3")


def _polyder(coeffs: np.ndarray, alpha: Sequence[int]) -> np.ndarray:
    c = coeffs
    for axis, a in enumerate(alpha):
        if a:
            c = np.polynomial.polynomial.polyder(c, a, axis=axis)
    return c


def _polymul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros(tuple(i + j - 1 for i, j in zip(a.shape, b.shape)))
    for idx in zip(*np.nonzero(a)):
        sl = tuple(slice(i, i + s) for i, s in zip(idx, b.shape))
        out[sl] += a[idx] * b
    return out


def _truncate(coeffs: np.ndarray, k: int) -> np.ndarray:
    deg = sum(np.indices(coeffs.shape))
    return np.where(deg <= k, coeffs, 0.0)


class Polynomial:
    """A polynomial in N variables from its coefficient array c[i, j, ...] of x^i y^j ..."""

    def __init__(self, coeffs, name: str = "polynomial"):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.name = name

    @property
    def dim(self) -> int:
        return self.coeffs.ndim

    def __call__(self, x) -> np.ndarray:
        return _polyval(self.coeffs, np.atleast_2d(x))

    def derivative(self, alpha, x) -> np.ndarray:
        return _polyval(_polyder(self.coeffs, alpha), np.atleast_2d(x))

    def taylor(self, k: int, x) -> np.ndarray:
        return _polyval(_truncate(self.coeffs, k), np.atleast_2d(x))

    def support(self) -> float | None:
        return None


class Sinusoid:
    """sin(a . x + b)."""

    def __init__(self, freq: Sequence[float], phase: float, name: str = "sinusoid"):
        self.freq = np.asarray(freq, dtype=float)
        self.phase = float(phase)
        self.name = name

    @property
    def dim(self) -> int:
        return self.freq.size

    def _sin(self, order: int, t):
        return np.sin(t + 0.5 * math.pi * order)

    def __call__(self, x) -> np.ndarray:
        return self._sin(0, np.atleast_2d(x) @ self.freq + self.phase)

    def derivative(self, alpha, x) -> np.ndarray:
        return float(np.prod(self.freq ** np.asarray(alpha))) * self._sin(sum(alpha), np.atleast_2d(x) @ self.freq
                                                                          + self.phase)

    def taylor(self, k: int, x) -> np.ndarray:
        t = np.atleast_2d(x) @ self.freq
        return sum(self._sin(l, self.phase) * t ** l / math.factorial(l) for l in range(k + 1))

    def support(self) -> float | None:
        return None


class ScaledBump:
    """U(x / s) with U = P(y) (1 - |y|^2)^(m+1) on the unit ball and 0 outside.

    The profile is C^m across the unit sphere, so U(x / s) lies in H^m and is
    supported in B(0, s).
    """

    def __init__(self, poly: np.ndarray, m: int, scale: float, name: str = "scaled bump"):
        poly = np.asarray(poly, dtype=float)
        n = poly.ndim
        base = np.zeros((3,) * n)
        base[(0,) * n] = 1.0
        for axis in range(n):
            idx = [0] * n
            idx[axis] = 2
            base[tuple(idx)] = -1.0
        q = np.ones((1,) * n)
        for _ in range(m + 1):
            q = _polymul(q, base)
        self.coeffs = _polymul(poly, q)
        self.scale = float(scale)
        self.name = name

    @property
    def dim(self) -> int:
        return self.coeffs.ndim

    def _inside(self, x):
        return np.linalg.norm(x, axis=1) < self.scale

    def __call__(self, x) -> np.ndarray:
        return self.derivative((0,) * self.dim, x)

    def derivative(self, alpha, x) -> np.ndarray:
        x = np.atleast_2d(x)
        v = _polyval(_polyder(self.coeffs, alpha), x / self.scale) * self.scale ** (-sum(alpha))
        return np.where(self._inside(x), v, 0.0)

    def taylor(self, k: int, x) -> np.ndarray:
        x = np.atleast_2d(x)
        return _polyval(_truncate(self.coeffs, k), x / self.scale)

    def support(self) -> float | None:
        return self.scale


def hm_norm_sq(u, m: int, domain: Domain, n: int = 24) -> float:
    """Sum over all multi-indices |alpha| <= m of int |d^alpha u|^2 over the domain."""
    r = u.support()
    if r is not None:
        if not Ball(tuple(np.zeros(domain.dim)), r).inside(domain):
            raise ValueError("support must lie inside the domain")
        pts, wts = ball_quadrature(domain.dim, r, n)
    else:
        pts, wts = box_quadrature(domain, n)
    total = 0.0
    for order in range(m + 1):
        for alpha in multi_indices(domain.dim, order):
            total += float(wts @ u.derivative(alpha, pts) ** 2)
    return total


def remainder_sq(u, k: int, eps: float, n: int = 24) -> float:
    """int over B(0, eps) of |u - T_k u|^2, T_k the Taylor polynomial of degree k at 0."""
    pts, wts = ball_quadrature(u.dim, eps, n)
    return float(wts @ (u(pts) - u.taylor(k, pts)) ** 2)


def taylor_case(N: int, m: int, k: int) -> str:
    if N == 2 * m - 2 * k - 1 and 0 <= k <= m - 1:
        return "odd"
    if N == 2 * m - 2 * k - 2 and 0 <= k <= m - 2:
        return "even"
    raise ValueError(f"(N, m, k) = ({N}, {m}, {k}) matches neither N = 2m-2k-1 nor N = 2m-2k-2")


def taylor_rhs(case: str, m: int, eps: float) -> float:
    base = eps ** (2 * m)
    return base * (1.0 + abs(math.log(eps))) if case == "even" else base


def default_panel(N: int, m: int, k: int) -> list[tuple[str, Callable[[float], object]]]:
    """(name, eps -> function) pairs; 'fixed' members ignore eps, 'scaled' ones live on B(0, eps)."""
    shape = (k + 2,) * N
    mono = np.zeros(shape)
    mono[(k + 1,) + (0,) * (N - 1)] = 1.0
    low = np.zeros(shape)
    for idx in itertools.product(range(k + 1), repeat=N):
        if sum(idx) <= k:
            low[idx] = 1.0 + sum(idx)
    one = np.zeros((2,) * N)
    one[(0,) * N] = 1.0
    lin = np.zeros((2,) * N)
    lin[(0,) * N] = 0.5
    lin[(1,) + (0,) * (N - 1)] = 1.0
    freq = np.linspace(1.0, 2.0, N)
    return [
        ("fixed:monomial_k+1", lambda e: Polynomial(mono, "monomial_k+1")),
        ("fixed:degree_k", lambda e: Polynomial(low, "degree_k")),
        ("fixed:sinusoid", lambda e: Sinusoid(freq, 0.3, "sinusoid")),
        ("scaled:bump", lambda e: ScaledBump(one, m, e, "bump")),
        ("scaled:linear_bump", lambda e: ScaledBump(lin, m, e, "linear_bump")),
    ]


@dataclass
class TaylorReport:
    N: int
    m: int
    k: int
    case: str
    eps: list[float]
    ratios: dict
    remainders: dict
    max_spread: float = 10.0

    def verdict(self, name: str) -> bool:
        """Scaled members: max/min ratio <= max_spread. Fixed members: no growth beyond that factor
        over the ratio at the largest eps. Identically zero remainders pass."""
        r = np.asarray(self.ratios[name])
        if np.all(np.asarray(self.remainders[name]) <= 1e-28):
            return True
        if name.startswith("scaled"):
            return bool(r.min() > 0 and r.max() / r.min() <= self.max_spread)
        return bool(r.max() <= self.max_spread * r[0])

    @property
    def passed(self) -> bool:
        return all(self.verdict(n) for n in self.ratios)

    def rows(self) -> list[list]:
        out = []
        for name in self.ratios:
            for e, rem, rat in zip(self.eps, self.remainders[name], self.ratios[name]):
                out.append([name, e, rem, rat, int(self.verdict(name))])
        return out


TAYLOR_HEADER = ["function", "eps", "remainder", "ratio", "bounded"]


def taylor_remainder_check(m: int, N: int, k: int, eps_values: Sequence[float], panel=None,
                           domain: Domain | None = None, max_spread: float = 10.0) -> TaylorReport:
    """Ratios of int_{B(0,eps)} |u - T_k u|^2 to eps^2m ||u||^2_{H^m} (times 1 + |log eps| for even N)."""
    case = taylor_case(N, m, k)
    domain = domain or Domain(tuple((-0.5, 0.5) for _ in range(N)))
    if not domain.contains(np.zeros((1, N)), closed=False)[0]:
        raise ValueError("the origin must be interior to the domain")
    panel = panel or default_panel(N, m, k)
    ratios, rems = {}, {}
    for name, make in panel:
        ratios[name], rems[name] = [], []
        for eps in eps_values:
            if not Ball(tuple(np.zeros(N)), eps).inside(domain):
                raise ValueError(f"B(0, {eps}) is not compactly inside the domain")
            u = make(eps)
            rem = remainder_sq(u, k, eps)
            norm = hm_norm_sq(u, m, domain)
            rems[name].append(rem)
            ratios[name].append(rem / (taylor_rhs(case, m, eps) * norm))
    return TaylorReport(N, m, k, case, list(map(float, eps_values)), ratios, rems, max_spread)


# ------------------------------------------------------------------ output


SWEEP_HEADER = ["eps", "j", "mu_j", "mass", "lp", "sup"]
RATE_HEADER = ["j", "slope", "intercept", "r2"]


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def _write_csv(path: Path, header: list, rows: list) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(f"{float(obj):.17g}") if math.isfinite(obj) else str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path: Path, data) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def emit(results, path, fmt: str = "csv") -> list[Path]:
    """Write results into directory ``path``; returns the files written."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    items = results if isinstance(results, list) else [results]
    written = []
    for item in items:
        name, header, rows, data = _describe(item)
        target = out / f"{name}.{fmt}"
        if fmt == "csv":
            if header is None:
                raise ValueError(f"{name} has no tabular form; use json")
            _write_csv(target, header, rows)
        else:
            write_json(target, data)
        written.append(target)
    return written


def _describe(item):
    from .bounds import BoundReport, CSV_HEADER
    from .gny import Decomposition

    if isinstance(item, SweepResult):
        return "sweep", SWEEP_HEADER, item.rows(), item.to_dict()
    if isinstance(item, RateFit):
        return f"rate_j{item.j}", RATE_HEADER, [item.row()], item.to_dict()
    if isinstance(item, SteklovTable):
        return "steklov", STEKLOV_HEADER, item.rows(), {"header": STEKLOV_HEADER, "rows": item.rows()}
    if isinstance(item, TaylorReport):
        return (f"taylor_N{item.N}_m{item.m}_k{item.k}", TAYLOR_HEADER, item.rows(),
                {"case": item.case, "eps": item.eps, "ratios": item.ratios, "remainders": item.remainders,
                 "passed": item.passed})
    if isinstance(item, Decomposition):
        return "decomposition", None, None, item.to_dict()
    if isinstance(item, Spectrum):
        rows = [[j, v, r] for j, (v, r) in enumerate(zip(item.eigenvalues, item.residuals), start=1)]
        return "spectrum", ["j", "mu_j", "residual"], rows, item.to_dict()
    if isinstance(item, tuple) and len(item) == 2 and isinstance(item[0], str):
        name, rows = item
        if rows and isinstance(rows[0], BoundReport):
            data = [{"kind": r.kind.value, "N": r.N, "m": r.m, "j": r.j, "eps": r.eps, "mu_j": r.mu_j,
                     "factor": r.factor, "ratio": r.ratio} for r in rows]
            return name, CSV_HEADER, [r.row() for r in rows], data
        return name, list(rows[0]) if rows else [], [list(r.values()) for r in rows], rows
    raise TypeError(f"cannot emit {type(item).__name__}")
