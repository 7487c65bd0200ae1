"""Radial test functions: C^{m-1} piecewise-polynomial bumps on annuli, polynomial
caps, the logarithmic profile for N = 2m, and their order-m energies."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import integrate

from .geometry import Annulus, Ball, Domain, as_points, unit_sphere_area


def _falling(i: int, l: int) -> float:
    """i (i-1) ... (i-l+1)."""
    return float(math.perm(i, l)) if i >= l else 0.0


def _hermite_rows(m: int, s: float, value: float) -> tuple[np.ndarray, np.ndarray]:
    """Rows imposing Q(s) = value and Q^(l)(s) = 0, l = 1..m-1, for Q = sum c_i s^i."""
    rows = np.zeros((m, 2 * m))
    rhs = np.zeros(m)
    for l in range(m):
        for i in range(l, 2 * m):
            rows[l, i] = _falling(i, l) * s ** (i - l)
    rhs[0] = value
    return rows, rhs


def _two_point(m: int, s0: float, v0: float, s1: float, v1: float) -> np.ndarray:
    a0, r0 = _hermite_rows(m, s0, v0)
    a1, r1 = _hermite_rows(m, s1, v1)
    mat = np.vstack([a0, a1])
    if np.linalg.cond(mat) > 1e12:
        raise np.linalg.LinAlgError("profile system is singular")
    return np.linalg.solve(mat, np.concatenate([r0, r1]))


def _poly_derivative(coeffs: np.ndarray, scale: float, t, l: int) -> np.ndarray:
    """l-th derivative in t of sum c_i (t/scale)^i."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for i in range(l, coeffs.size):
        out = out + coeffs[i] * _falling(i, l) * t ** (i - l) / scale ** i
    return out


@dataclass(frozen=True)
class BumpProfile:
    """U equal to 1 on [r, R), 0 outside [r/2, 2R), polynomial transitions.

    Inner coefficients act on (t/r)^i and outer ones on (t/R)^i, so both sets
    depend on m only. r = 0 leaves a plain cap around a ball of radius R.
    """

    m: int
    r: float
    R: float
    a: np.ndarray
    b: np.ndarray

    @property
    def support(self) -> float:
        return 2.0 * self.R

    def breakpoints(self) -> list[float]:
        if self.r == 0:
            return [0.0, self.R, 2.0 * self.R]
        return [0.5 * self.r, self.r, self.R, 2.0 * self.R]

    def derivative(self, t, l: int = 0) -> np.ndarray:
        if not 0 <= l <= self.m:
            raise ValueError(f"derivative order {l} outside 0..{self.m}")
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        plateau = (t >= self.r) & (t < self.R)
        if l == 0:
            out = np.where(plateau, 1.0, out)
        if self.r > 0:
            inner = (t >= 0.5 * self.r) & (t < self.r)
            out = np.where(inner, _poly_derivative(self.a, self.r, t, l), out)
        outer = (t >= self.R) & (t < 2.0 * self.R)
        return np.where(outer, _poly_derivative(self.b, self.R, t, l), out)

    def condition_residual(self) -> float:
        """Largest violation of the 4m matching conditions, derivatives scaled by t^l."""
        checks = [(self.R, 1.0, self.b, self.R), (2.0 * self.R, 0.0, self.b, self.R)]
        if self.r > 0:
            checks += [(0.5 * self.r, 0.0, self.a, self.r), (self.r, 1.0, self.a, self.r)]
        worst = 0.0
        for t0, target, coeffs, scale in checks:
            for l in range(self.m):
                val = float(_poly_derivative(coeffs, scale, t0, l)) * scale ** l
                worst = max(worst, abs(val - (target if l == 0 else 0.0)))
        return worst

    def to_dict(self) -> dict:
        return {"type": "bump", "m": self.m, "r": _f17(self.r), "R": _f17(self.R),
                "a": [_f17(v) for v in self.a], "b": [_f17(v) for v in self.b]}


def _f17(v: float) -> float:
    return float(f"{float(v):.17g}")


def solve_profile(m: int, r: float, R: float) -> BumpProfile:
    """Bump coefficients from the 4m Hermite conditions at r/2, r, R and 2R."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 0.0 <= r < R:
        raise ValueError("radii must satisfy 0 <= r < R")
    a = _two_point(m, 0.5, 0.0, 1.0, 1.0) if r > 0 else np.zeros(2 * m)
    b = _two_point(m, 1.0, 1.0, 2.0, 0.0)
    prof = BumpProfile(m, float(r), float(R), a, b)
    res = prof.condition_residual()
    if res > 1e-10:
        raise np.linalg.LinAlgError(f"profile conditions violated by {res:.2e}")
    return prof


@dataclass(frozen=True)
class CapProfile:
    """U = 1 on [0, eps/2), polynomial in t/eps on [eps/2, eps), 0 beyond."""

    m: int
    eps: float
    c: np.ndarray

    @property
    def support(self) -> float:
        return self.eps

    def breakpoints(self) -> list[float]:
        return [0.0, 0.5 * self.eps, self.eps]

    def derivative(self, t, l: int = 0) -> np.ndarray:
        if not 0 <= l <= self.m:
            raise ValueError(f"derivative order {l} outside 0..{self.m}")
        t = np.asarray(t, dtype=float)
        out = np.where(t < 0.5 * self.eps, 1.0 if l == 0 else 0.0, 0.0)
        ramp = (t >= 0.5 * self.eps) & (t < self.eps)
        return np.where(ramp, _poly_derivative(self.c, self.eps, t, l), out)

    def condition_residual(self) -> float:
        worst = 0.0
        for t0, target in ((0.5 * self.eps, 1.0), (self.eps, 0.0)):
            for l in range(self.m):
                val = float(_poly_derivative(self.c, self.eps, t0, l)) * self.eps ** l
                worst = max(worst, abs(val - (target if l == 0 else 0.0)))
        return worst

    def to_dict(self) -> dict:
        return {"type": "cap", "m": self.m, "eps": _f17(self.eps), "c": [_f17(v) for v in self.c]}


def cap_profile(m: int, eps: float) -> CapProfile:
    if not eps > 0:
        raise ValueError("eps must be positive")
    cap = CapProfile(m, float(eps), _two_point(m, 0.5, 1.0, 1.0, 0.0))
    if cap.condition_residual() > 1e-10:
        raise np.linalg.LinAlgError("cap conditions violated")
    return cap


@dataclass(frozen=True)
class LogProfile:
    """U1 = -log t + log eps0 - sum_{k<m} (eps0 - t)^k / (k eps0^k) on [eps, eps0),
    U2 = alpha + sum_{k=0}^{m-2} alpha_k t^(m+k) on [0, eps), 0 beyond eps0."""

    m: int
    eps: float
    eps0: float
    alpha: float
    alphas: np.ndarray

    @property
    def support(self) -> float:
        return self.eps0

    def breakpoints(self) -> list[float]:
        return [0.0, self.eps, self.eps0]

    def outer(self, t, l: int = 0) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if l == 0:
            out = -np.log(t) + math.log(self.eps0)
        else:
            out = (-1.0) ** l * math.factorial(l - 1) * t ** (-float(l))
        for k in range(max(l, 1), self.m):
            out = out - (-1.0) ** l * _falling(k, l) * (self.eps0 - t) ** (k - l) / (k * self.eps0 ** k)
        return out

    def inner(self, t, l: int = 0) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.alpha if l == 0 else 0.0)
        for k, ak in enumerate(self.alphas):
            p = self.m + k
            out = out + ak * _falling(p, l) * t ** (p - l)
        return out

    def derivative(self, t, l: int = 0) -> np.ndarray:
        if not 0 <= l <= self.m:
            raise ValueError(f"derivative order {l} outside 0..{self.m}")
        t = np.asarray(t, dtype=float)
        safe = np.clip(t, self.eps, self.eps0)
        out = np.where(t < self.eps, self.inner(t, l), self.outer(safe, l))
        return np.where(t >= self.eps0, 0.0, out)

    def matching_residual(self) -> float:
        """max_l eps^l |U1^(l)(eps) - U2^(l)(eps)| relative to |alpha|."""
        worst = 0.0
        for l in range(self.m):
            d = float(self.outer(self.eps, l) - self.inner(self.eps, l)) * self.eps ** l
            worst = max(worst, abs(d))
        return worst / max(1.0, abs(self.alpha))

    def to_dict(self) -> dict:
        return {"type": "log", "m": self.m, "eps": _f17(self.eps), "eps0": _f17(self.eps0),
                "alpha": _f17(self.alpha), "alphas": [_f17(v) for v in self.alphas]}


def log_profile(m: int, eps: float, eps0: float) -> LogProfile:
    """Match U2 to U1 in value and first m-1 derivatives at t = eps.

    The unknowns are solved in the scaled form alpha_k eps^(m+k) so the
    system entries stay O(1) for small eps.
    """
    if not 0.0 < eps < eps0 < 1.0:
        raise ValueError("need 0 < eps < eps0 < 1")
    shell = LogProfile(m, eps, eps0, 0.0, np.zeros(max(m - 1, 0)))
    mat = np.zeros((m, m))
    rhs = np.zeros(m)
    for l in range(m):
        mat[l, 0] = 1.0 if l == 0 else 0.0
        for k in range(m - 1):
            mat[l, k + 1] = _falling(m + k, l)
        rhs[l] = float(shell.outer(eps, l)) * eps ** l
    if np.linalg.cond(mat) > 1e12:
        raise np.linalg.LinAlgError("log matching system is singular")
    sol = np.linalg.solve(mat, rhs)
    alphas = np.array([sol[k + 1] / eps ** (m + k) for k in range(m - 1)])
    prof = LogProfile(m, float(eps), float(eps0), float(sol[0]), alphas)
    if prof.matching_residual() > 1e-8:
        raise np.linalg.LinAlgError("log profile matching failed")
    return prof


def log_growth_constants(m: int, eps_values: Sequence[float], eps0: float) -> tuple[float, float]:
    """Observed (min, max) of |alpha(eps)| / |log eps| over the given eps values."""
    ratios = [abs(log_profile(m, e, eps0).alpha) / abs(math.log(e)) for e in eps_values]
    return min(ratios), max(ratios)


Profile = Union[BumpProfile, CapProfile, LogProfile]


def profile_derivative(p: Profile, t, l: int = 0) -> np.ndarray:
    return p.derivative(t, l)


@dataclass(frozen=True)
class RadialTestFunction:
    center: tuple
    profile: Profile

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.ravel(self.center)))

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def support_radius(self) -> float:
        return self.profile.support

    def __call__(self, x) -> np.ndarray:
        pts = as_points(x, self.dim)
        return self.profile.derivative(np.linalg.norm(pts - np.asarray(self.center), axis=1), 0)

    def inside(self, domain: Domain) -> bool:
        """Closed support contained in the closed box."""
        c = np.asarray(self.center)
        return bool(np.all(c - self.support_radius >= domain.lo) and np.all(c + self.support_radius <= domain.hi))

    def to_dict(self) -> dict:
        return {"center": list(self.center), "profile": self.profile.to_dict()}


# ------------------------------------------------------------------ energies


def radial_derivative_coefficients(N: int, m: int) -> dict:
    """Coefficient polynomials of d^alpha U(|x|) = sum_k c_{k,alpha}(theta) U^(k)(r) / r^(m-k).

    Returns {alpha: {k: {beta: coef}}}, beta a multi-index of theta = x/|x|.
    """
    out = {}
    for alpha in itertools.product(range(m + 1), repeat=N):
        if sum(alpha) != m:
            continue
        terms = {(0, 0, (0,) * N): 1.0}   # (k, s, beta) -> coef of U^(k) r^-s theta^beta
        for axis, count in enumerate(alpha):
            for _ in range(count):
                terms = _differentiate(terms, axis, N)
        poly = {}
        for (k, s, beta), coef in terms.items():
            if coef == 0.0:
                continue
            assert s == m - k
            poly.setdefault(k, {})
            poly[k][beta] = poly[k].get(beta, 0.0) + coef
        out[alpha] = poly
    return out


def _differentiate(terms: dict, i: int, N: int) -> dict:
    new: dict = {}

    def add(key, val):
        new[key] = new.get(key, 0.0) + val

    e = [tuple(1 if d == j else 0 for d in range(N)) for j in range(N)]
    for (k, s, beta), c in terms.items():
        up = tuple(b + ei for b, ei in zip(beta, e[i]))
        add((k + 1, s, up), c)
        if s:
            add((k, s + 1, up), -s * c)
        if beta[i]:
            down = tuple(b - ei for b, ei in zip(beta, e[i]))
            add((k, s + 1, down), beta[i] * c)
        if sum(beta):
            add((k, s + 1, up), -sum(beta) * c)
    return new


def energy_constant(N: int, m: int) -> float:
    """C_{N,m} = sum_alpha (sum_k sup_theta |c_{k,alpha}|)^2, sup bounded by the coefficient l1 norm."""
    total = 0.0
    for poly in radial_derivative_coefficients(N, m).values():
        s = sum(sum(abs(v) for v in p.values()) for p in poly.values())
        total += s * s
    return total


@dataclass(frozen=True)
class RadialEnergy:
    surrogate: float
    constant: float
    exact: float | None


def _radial_integral(p: Profile, k: int, power: float) -> float:
    """int (U^(k))^2 t^power dt over the profile's support."""
    br = p.breakpoints()
    total = 0.0
    for a, b in zip(br[:-1], br[1:]):
        if b <= a:
            continue
        val, _ = integrate.quad(lambda t: float(p.derivative(t, k)) ** 2 * t ** power, a, b,
                                epsabs=0.0, epsrel=1e-12, limit=200)
        total += val
    return total


def radial_energy(f: RadialTestFunction | Profile, N: int, m: int) -> RadialEnergy:
    """Order-m energy of x -> U(|x - a|).

    The surrogate is C_{N,m} |S^{N-1}| sum_k int (U^(k))^2 t^(N-1-2(m-k)) dt,
    an upper estimate of int |D^m u|^2; for m = 1 the exact Dirichlet energy
    is returned too.
    """
    p = f.profile if isinstance(f, RadialTestFunction) else f
    if m != p.m:
        raise ValueError("energy order must match the profile order")
    if m < 1:
        raise ValueError("unsupported order")
    area = unit_sphere_area(N)
    parts = sum(_radial_integral(p, k, N - 1 - 2 * (m - k)) for k in range(1, m + 1))
    const = energy_constant(N, m)
    exact = area * _radial_integral(p, 1, N - 1) if m == 1 else None
    return RadialEnergy(const * area * parts, const, exact)


# ------------------------------------------------------------------ families


def _support_annulus(region) -> tuple[np.ndarray, float, float]:
    if isinstance(region, Ball):
        return np.asarray(region.center), 0.0, 2.0 * region.radius
    return np.asarray(region.center), 0.5 * region.inner, 2.0 * region.outer


def _supports_disjoint(a, b) -> bool:
    ca, ra, Ra = _support_annulus(a)
    cb, rb, Rb = _support_annulus(b)
    d = float(np.linalg.norm(ca - cb))
    return d >= Ra + Rb or d + Rb <= ra or d + Ra <= rb


def build_disjoint_family(regions: Sequence, m: int, domain: Domain | None = None,
                          grid: int = 16) -> list[RadialTestFunction]:
    """One bump per annulus or ball, equal to 1 on the region and supported on its double."""
    funcs = []
    for reg in regions:
        if isinstance(reg, Ball):
            prof = solve_profile(m, 0.0, reg.radius)
        elif isinstance(reg, Annulus):
            prof = solve_profile(m, reg.inner, reg.outer)
        else:
            raise TypeError(f"unsupported region {reg!r}")
        funcs.append(RadialTestFunction(reg.center, prof))
    for i in range(len(regions)):
        for k in range(i + 1, len(regions)):
            if not _supports_disjoint(regions[i], regions[k]):
                raise ValueError(f"doubled regions {i} and {k} overlap")
    if domain is not None:
        for i, f in enumerate(funcs):
            if not f.inside(domain):
                raise ValueError(f"support of function {i} leaves the domain")
        axes = [np.linspace(lo, hi, grid) for lo, hi in domain.bounds]
        pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        vals = [np.abs(f(pts)) > 0 for f in funcs]
        for i in range(len(vals)):
            for k in range(i + 1, len(vals)):
                if np.any(vals[i] & vals[k]):
                    raise ValueError(f"supports {i} and {k} intersect on the sample grid")
    return funcs


def profile_to_json(p: Profile) -> str:
    return json.dumps(p.to_dict())
