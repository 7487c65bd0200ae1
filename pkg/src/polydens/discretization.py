"""Tensor-product B-spline spaces and assembly of the stiffness, mass and
boundary forms.

Basis functions are open-knot B-splines of degree p with maximal smoothness
C^{p-1} on arbitrary breakpoints per axis, so the space is H^m-conforming for
every m <= p. The stiffness form is a Kronecker sum of 1D derivative Gram
matrices and is exact. Mass forms are assembled term by term from a density's
decomposition into a constant, boxes, balls and smooth functions:

* boxes are integrated exactly (element pieces are clipped at the box faces),
* balls use a per-element midpoint subdivision of depth ``depth`` on cut
  elements, and the resulting volume defect is recorded,
* smooth functions use an over-integrated Gauss rule.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .geometry import Ball, Domain

NATURAL = "natural"
CLAMPED = "clamped"


def gauss_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def basis_derivatives(knots: np.ndarray, p: int, span: np.ndarray, x: np.ndarray, nd: int) -> np.ndarray:
    """Nonzero B-spline values and derivatives, vectorised over points.

    Returns shape (npts, nd + 1, p + 1); entry [i, k, r] is the k-th
    derivative of basis function span - p + r at x[i].
    """
    x = np.asarray(x, dtype=float)
    span = np.asarray(span, dtype=int)
    n = x.size
    ndu = np.zeros((p + 1, p + 1, n))
    ndu[0, 0] = 1.0
    left = np.zeros((p + 1, n))
    right = np.zeros((p + 1, n))
    for j in range(1, p + 1):
        left[j] = x - knots[span + 1 - j]
        right[j] = knots[span + j] - x
        saved = np.zeros(n)
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    ders = np.zeros((nd + 1, p + 1, n))
    ders[0] = ndu[:, p]
    top = min(nd, p)
    a = np.zeros((2, p + 1, n))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for k in range(1, top + 1):
            d = np.zeros(n)
            rk, pk = r - k, p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d = d + a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d = d + a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1
    fac = p
    for k in range(1, top + 1):
        ders[k] *= fac
        fac *= p - k
    return ders.transpose(2, 0, 1)


class SplineBasis:
    """Open-knot B-spline basis of degree p on the given breakpoints."""

    def __init__(self, breaks: Sequence[float], degree: int):
        br = np.asarray(breaks, dtype=float)
        if br.ndim != 1 or br.size < 2 or np.any(np.diff(br) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if degree < 1:
            raise ValueError("degree must be >= 1")
        self.breaks = br
        self.degree = degree
        self.knots = np.concatenate([np.full(degree, br[0]), br, np.full(degree, br[-1])])

    @property
    def n_elements(self) -> int:
        return self.breaks.size - 1

    @property
    def n_basis(self) -> int:
        return self.n_elements + self.degree

    def find_element(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        e = np.searchsorted(self.breaks, x, side="right") - 1
        return np.clip(e, 0, self.n_elements - 1)

    def element_values(self, elem, x, nd: int = 0) -> np.ndarray:
        """(npts, nd+1, p+1) values of the p+1 functions living on ``elem``."""
        elem = np.broadcast_to(np.asarray(elem, dtype=int), np.shape(x))
        return basis_derivatives(self.knots, self.degree, np.ravel(elem) + self.degree, np.ravel(x), nd)

    def collocation(self, x, deriv: int = 0) -> sp.csr_matrix:
        x = np.ravel(np.asarray(x, dtype=float))
        e = self.find_element(x)
        vals = self.element_values(e, x, deriv)[:, deriv, :]
        p = self.degree
        rows = np.repeat(np.arange(x.size), p + 1)
        cols = (e[:, None] + np.arange(p + 1)).ravel()
        return sp.csr_matrix((vals.ravel(), (rows, cols)), shape=(x.size, self.n_basis))

    def greville(self) -> np.ndarray:
        p = self.degree
        if p == 0:
            return 0.5 * (self.breaks[:-1] + self.breaks[1:])
        k = self.knots
        return np.array([k[i + 1:i + p + 1].mean() for i in range(self.n_basis)])

    def gram(self, deriv: int = 0, interval: tuple[float, float] | None = None) -> sp.csr_matrix:
        """Exact matrix of int_I B_i^(deriv) B_j^(deriv) over ``interval``."""
        p = self.degree
        lo = self.breaks[:-1]
        hi = self.breaks[1:]
        if interval is not None:
            lo = np.maximum(lo, interval[0])
            hi = np.minimum(hi, interval[1])
        elems = np.nonzero(hi > lo)[0]
        if elems.size == 0:
            return sp.csr_matrix((self.n_basis, self.n_basis))
        q, w = gauss_rule(p + 1)
        h = (hi - lo)[elems]
        x = lo[elems, None] + h[:, None] * q[None, :]
        vals = self.element_values(np.repeat(elems, q.size), x.ravel(), deriv)[:, deriv, :]
        vals = vals.reshape(elems.size, q.size, p + 1)
        loc = np.einsum("eq,eqa,eqb->eab", h[:, None] * w[None, :], vals, vals)
        return _scatter_1d(elems, loc, self.n_basis)

    def subcell_grams(self, nsub: int, deriv: int = 0) -> np.ndarray:
        """Per-element Gram matrices over each of nsub equal subintervals.

        Shape (n_elements, nsub, p+1, p+1).
        """
        p = self.degree
        q, w = gauss_rule(p + 1)
        h = np.diff(self.breaks)
        hs = h / nsub
        t = (np.arange(nsub)[:, None] + q[None, :]) / nsub
        x = self.breaks[:-1, None, None] + h[:, None, None] * t[None]
        elems = np.repeat(np.arange(self.n_elements), nsub * q.size)
        vals = self.element_values(elems, x.ravel(), deriv)[:, deriv, :]
        vals = vals.reshape(self.n_elements, nsub, q.size, p + 1)
        return np.einsum("e,q,esqa,esqb->esab", hs, w, vals, vals)

    def refined(self) -> "SplineBasis":
        mid = 0.5 * (self.breaks[:-1] + self.breaks[1:])
        br = np.empty(2 * self.breaks.size - 1)
        br[0::2] = self.breaks
        br[1::2] = mid
        return SplineBasis(br, self.degree)

    def prolongation(self, fine: "SplineBasis") -> sp.csr_matrix:
        """Matrix mapping coarse coefficients to the same function on ``fine``."""
        g = fine.greville()
        cf = fine.collocation(g).tocsc()
        cc = self.collocation(g).toarray()
        p = splu(cf).solve(cc)
        p[np.abs(p) < 1e-14] = 0.0
        return sp.csr_matrix(p)


def _scatter_1d(elems: np.ndarray, loc: np.ndarray, n: int) -> sp.csr_matrix:
    k = loc.shape[1]
    idx = elems[:, None] + np.arange(k)[None, :]
    rows = np.repeat(idx, k, axis=1).ravel()
    cols = np.tile(idx, (1, k)).ravel()
    return sp.csr_matrix((loc.ravel(), (rows, cols)), shape=(n, n))


@dataclass
class DiscreteSpace:
    domain: Domain
    m: int
    degree: int
    breaks: tuple
    bc: str = NATURAL
    bases: list = field(init=False, repr=False)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("order m must be >= 1")
        if self.degree < self.m:
            raise ValueError(f"degree {self.degree} < m = {self.m} is not H^m-conforming")
        if self.bc not in (NATURAL, CLAMPED):
            raise ValueError(f"unknown boundary condition {self.bc!r}")
        if self.bc == CLAMPED and self.domain.dim != 1:
            raise ValueError("clamped spaces are only available in 1D")
        if len(self.breaks) != self.domain.dim:
            raise ValueError("one breakpoint array per axis is required")
        self.breaks = tuple(np.asarray(b, dtype=float) for b in self.breaks)
        for b, (lo, hi) in zip(self.breaks, self.domain.bounds):
            if b.size < 3:
                raise ValueError("at least 2 elements per axis are required")
            if not (math.isclose(b[0], lo) and math.isclose(b[-1], hi)):
                raise ValueError("breakpoints must span the domain")
        self.bases = [SplineBasis(b, self.degree) for b in self.breaks]

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def shape(self) -> tuple:
        return tuple(b.n_basis for b in self.bases)

    @property
    def n_full(self) -> int:
        return int(np.prod(self.shape))

    @property
    def free(self) -> np.ndarray:
        """Indices of the retained basis functions."""
        if self.bc == CLAMPED:
            return np.arange(self.m, self.n_full - self.m)
        return np.arange(self.n_full)

    @property
    def ndof(self) -> int:
        return self.free.size

    @property
    def elements(self) -> tuple:
        return tuple(b.n_elements for b in self.bases)

    def restrict(self, a: sp.spmatrix) -> sp.csr_matrix:
        a = sp.csr_matrix(a)
        if self.bc == NATURAL:
            return a
        f = self.free
        return a[f][:, f].tocsr()

    def collocation(self, points, deriv: Sequence[int] | None = None) -> sp.csr_matrix:
        """Sparse matrix evaluating (a derivative of) every retained basis function."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        deriv = tuple(deriv) if deriv is not None else (0,) * self.dim
        p = self.degree
        npts = pts.shape[0]
        vals = np.ones((npts, 1))
        idx = np.zeros((npts, 1), dtype=np.int64)
        for d, basis in enumerate(self.bases):
            e = basis.find_element(pts[:, d])
            v = basis.element_values(e, pts[:, d], deriv[d])[:, deriv[d], :]
            i = e[:, None] + np.arange(p + 1)[None, :]
            vals = (vals[:, :, None] * v[:, None, :]).reshape(npts, -1)
            idx = (idx[:, :, None] * basis.n_basis + i[:, None, :]).reshape(npts, -1)
        rows = np.repeat(np.arange(npts), vals.shape[1])
        c = sp.csr_matrix((vals.ravel(), (rows, idx.ravel())), shape=(npts, self.n_full))
        return c[:, self.free] if self.bc == CLAMPED else c

    def evaluate(self, coeffs: np.ndarray, points, deriv: Sequence[int] | None = None) -> np.ndarray:
        return self.collocation(points, deriv) @ np.asarray(coeffs)


def build_space(
    domain: Domain,
    m: int,
    elements: int | Sequence[int] = 8,
    bc: str = NATURAL,
    degree: int | None = None,
    breaks: Sequence[Sequence[float]] | None = None,
) -> DiscreteSpace:
    """Uniform (or explicitly broken) tensor spline space; degree defaults to max(m, 2)."""
    degree = max(m, 2) if degree is None else degree
    if breaks is None:
        counts = [elements] * domain.dim if np.isscalar(elements) else list(elements)
        if len(counts) != domain.dim:
            raise ValueError("need one element count per axis")
        if min(counts) < 2:
            raise ValueError("at least 2 elements per axis are required")
        breaks = [np.linspace(lo, hi, n + 1) for (lo, hi), n in zip(domain.bounds, counts)]
    return DiscreteSpace(domain, m, degree, tuple(breaks), bc)


def refine(space: DiscreteSpace) -> DiscreteSpace:
    """Dyadic bisection of every element."""
    return DiscreteSpace(space.domain, space.m, space.degree,
                         tuple(b.refined().breaks for b in space.bases), space.bc)


def prolongation(coarse: DiscreteSpace, fine: DiscreteSpace) -> sp.csr_matrix:
    p = _kron_all([c.prolongation(f) for c, f in zip(coarse.bases, fine.bases)])
    if coarse.bc == CLAMPED:
        p = p[fine.free][:, coarse.free]
    return p.tocsr()


def _kron_all(mats: Sequence[sp.spmatrix]) -> sp.csr_matrix:
    out = sp.csr_matrix(mats[0])
    for mat in mats[1:]:
        out = sp.kron(out, mat, format="csr")
    return out


def multi_indices(dim: int, order: int) -> list[tuple]:
    """All multi-indices alpha in N^dim with |alpha| = order, lexicographic."""
    return [a for a in itertools.product(range(order + 1), repeat=dim) if sum(a) == order]


def _symmetric(a: sp.spmatrix) -> sp.csr_matrix:
    a = sp.csr_matrix(a)
    out = (0.5 * (a + a.T)).tocsr()
    out.sum_duplicates()
    out.sort_indices()
    return out


def assemble_stiffness(space: DiscreteSpace) -> sp.csr_matrix:
    """Matrix of sum_{|alpha|=m} int d^alpha u d^alpha v (each alpha counted once)."""
    grams = [{k: b.gram(k) for k in range(space.m + 1)} for b in space.bases]
    k = None
    for alpha in multi_indices(space.dim, space.m):
        term = _kron_all([grams[d][a] for d, a in enumerate(alpha)])
        k = term if k is None else k + term
    return _symmetric(space.restrict(k))


@dataclass
class QuadratureReport:
    """Diagnostics of a mass assembly with non-grid-aligned interfaces."""

    depth: int
    interface_cells: int = 0
    ball_volume_error: list = field(default_factory=list)

    @property
    def max_volume_error(self) -> float:
        return max(self.ball_volume_error, default=0.0)


def density_terms(rho) -> list:
    """Normalise a density (or a positive constant) into (coef, region) terms."""
    if np.isscalar(rho):
        if not rho > 0:
            raise ValueError("density must be positive")
        return [(float(rho), None)]
    return list(rho.mass_terms())


def assemble_mass(space: DiscreteSpace, rho, depth: int = 4, gauss_extra: int = 4,
                  return_report: bool = False):
    """Matrix of int rho u v for a density given as a sum of simple terms.

    ``rho`` is a positive number or an object whose ``mass_terms()`` yields
    (coef, region) pairs with region None (whole box), a Domain (sub-box), a
    Ball, or a callable f(points) -> values for a smooth factor.
    """
    if not np.isscalar(rho) and hasattr(rho, "essential_inf") and not rho.essential_inf() > 0:
        raise ValueError("density must have a positive essential infimum")
    report = QuadratureReport(depth)
    total = sp.csr_matrix((space.n_full, space.n_full))
    for coef, region in density_terms(rho):
        if region is None:
            term = _kron_all([b.gram(0) for b in space.bases])
        elif isinstance(region, Domain):
            term = _kron_all([b.gram(0, iv) for b, iv in zip(space.bases, region.bounds)])
        elif isinstance(region, Ball):
            if space.dim == 1:
                c, r = region.center[0], region.radius
                term = space.bases[0].gram(0, (c - r, c + r))
            else:
                term = _ball_mass(space, region, depth, report)
        elif callable(region):
            term = _function_mass(space, region, gauss_extra)
        else:
            raise TypeError(f"unsupported mass term {region!r}")
        total = total + coef * term
    m = _symmetric(space.restrict(total))
    return (m, report) if return_report else m


def _element_dofs(space: DiscreteSpace, elems: np.ndarray) -> np.ndarray:
    """Global (full) dof indices of the local functions on each element, C order."""
    p = space.degree
    local = np.array(list(itertools.product(range(p + 1), repeat=space.dim)))
    idx = elems[:, None, :] + local[None, :, :]
    return np.ravel_multi_index(tuple(idx[..., d] for d in range(space.dim)), space.shape)


def _scatter(space: DiscreteSpace, elems: np.ndarray, loc: np.ndarray) -> sp.csr_matrix:
    dofs = _element_dofs(space, elems)
    k = dofs.shape[1]
    rows = np.repeat(dofs, k, axis=1).ravel()
    cols = np.tile(dofs, (1, k)).ravel()
    n = space.n_full
    return sp.csr_matrix((loc.ravel(), (rows, cols)), shape=(n, n))


_CONTRACT = {
    2: "ij,iab,jcd->acbd",
    3: "ijk,iab,jcd,kef->acebdf",
}


def _ball_mass(space: DiscreteSpace, ball: Ball, depth: int, report: QuadratureReport) -> sp.csr_matrix:
    """Mass of the indicator of a ball by midpoint subdivision of cut elements."""
    dim = space.dim
    nsub = 2 ** depth
    c = np.asarray(ball.center)
    r = ball.radius
    cand = []
    for d, b in enumerate(space.bases):
        lo, hi = b.breaks[:-1], b.breaks[1:]
        cand.append(np.nonzero((hi > c[d] - r) & (lo < c[d] + r))[0])
    grams = [b.subcell_grams(nsub) for b in space.bases]
    t = (np.arange(nsub) + 0.5) / nsub
    elems, locs = [], []
    included = 0.0
    nloc = (space.degree + 1) ** dim
    for e in itertools.product(*cand):
        mids = []
        for d, b in enumerate(space.bases):
            lo, hi = b.breaks[e[d]], b.breaks[e[d] + 1]
            mids.append(lo + (hi - lo) * t)
        grid = np.meshgrid(*mids, indexing="ij")
        dist2 = sum((g - c[d]) ** 2 for d, g in enumerate(grid))
        ind = (dist2 < r * r).astype(float)
        s = ind.sum()
        if s == 0:
            continue
        if s < ind.size:
            report.interface_cells += 1
        cell = np.prod([space.bases[d].breaks[e[d] + 1] - space.bases[d].breaks[e[d]] for d in range(dim)])
        included += s * cell / ind.size
        loc = np.einsum(_CONTRACT[dim], ind, *[grams[d][e[d]] for d in range(dim)], optimize=True)
        elems.append(e)
        locs.append(loc.reshape(nloc, nloc))
    report.ball_volume_error.append(abs(included - ball.volume()) / ball.volume())
    if not elems:
        return sp.csr_matrix((space.n_full, space.n_full))
    return _scatter(space, np.array(elems), np.array(locs))


def _function_mass(space: DiscreteSpace, f: Callable, extra: int) -> sp.csr_matrix:
    """Mass with a smooth weight f by over-integrated element Gauss quadrature."""
    dim = space.dim
    p = space.degree
    q, w = gauss_rule(p + 1 + extra)
    per_axis = []
    for b in space.bases:
        h = np.diff(b.breaks)
        x = b.breaks[:-1, None] + h[:, None] * q[None, :]
        v = b.element_values(np.repeat(np.arange(b.n_elements), q.size), x.ravel(), 0)[:, 0, :]
        per_axis.append((x, h[:, None] * w[None, :], v.reshape(b.n_elements, q.size, p + 1)))
    nloc = (p + 1) ** dim
    elems, locs = [], []
    for e in itertools.product(*[range(b.n_elements) for b in space.bases]):
        pts = np.meshgrid(*[per_axis[d][0][e[d]] for d in range(dim)], indexing="ij")
        pts = np.stack([g.ravel() for g in pts], axis=1)
        wt = per_axis[0][1][e[0]]
        phi = per_axis[0][2][e[0]]
        for d in range(1, dim):
            wt = np.multiply.outer(wt, per_axis[d][1][e[d]]).ravel()
            phi = np.einsum("ia,jb->ijab", phi, per_axis[d][2][e[d]]).reshape(wt.size, -1)
        val = wt * np.asarray(f(pts), dtype=float).ravel()
        locs.append((phi.T * val) @ phi)
        elems.append(e)
    return _scatter(space, np.array(elems), np.array(locs).reshape(-1, nloc, nloc))


def assemble_boundary_mass(space: DiscreteSpace) -> sp.csr_matrix:
    """Matrix of int_{boundary} u v (endpoint evaluation in 1D)."""
    if space.bc != NATURAL:
        raise ValueError("boundary mass needs a natural (unconstrained) space")
    full = [b.gram(0) for b in space.bases]
    total = None
    for d, b in enumerate(space.bases):
        for end in (0, b.n_basis - 1):
            e = sp.csr_matrix(([1.0], ([end], [end])), shape=(b.n_basis, b.n_basis))
            term = _kron_all([e if k == d else full[k] for k in range(space.dim)])
            total = term if total is None else total + term
    return _symmetric(total)


def interpolate(space: DiscreteSpace, f: Callable) -> np.ndarray:
    """Coefficients interpolating f at the tensor Greville points.

    Reproduces every polynomial of degree <= p in each variable exactly.
    """
    g = [b.greville() for b in space.bases]
    grid = np.meshgrid(*g, indexing="ij")
    pts = np.stack([x.ravel() for x in grid], axis=1)
    vals = np.asarray(f(pts), dtype=float).reshape(space.shape)
    for d, b in enumerate(space.bases):
        lu = splu(b.collocation(g[d]).tocsc())
        vals = np.moveaxis(vals, d, 0)
        sh = vals.shape
        vals = lu.solve(vals.reshape(sh[0], -1)).reshape(sh)
        vals = np.moveaxis(vals, 0, d)
    return vals.ravel()[space.free]


@dataclass
class Projection:
    coeffs: np.ndarray
    relative_error: float


def project(f: Callable, space: DiscreteSpace, rho=1.0, subdivisions: int = 2) -> Projection:
    """rho-weighted L^2 projection of f; the relative rho-weighted L^2 error is reported."""
    m = assemble_mass(space, rho)
    pts, wts = quadrature_points(space, subdivisions)
    weight = wts * _density_values(rho, pts)
    fv = np.asarray(f(pts), dtype=float).ravel()
    c = space.collocation(pts)
    rhs = c.T @ (weight * fv)
    coeffs = splu(m.tocsc()).solve(rhs)
    diff = c @ coeffs - fv
    norm = math.sqrt(float(np.sum(weight * fv * fv)))
    err = math.sqrt(float(np.sum(weight * diff * diff)))
    return Projection(coeffs, err / norm if norm > 0 else err)


def _density_values(rho, pts: np.ndarray) -> np.ndarray:
    if np.isscalar(rho):
        return np.full(pts.shape[0], float(rho))
    return np.asarray(rho.evaluate(pts), dtype=float)


def quadrature_points(space: DiscreteSpace, subdivisions: int = 2, extra: int = 2):
    """Tensor Gauss points and weights on every element split into subcells."""
    q, w = gauss_rule(space.degree + 1 + extra)
    xs, ws = [], []
    for b in space.bases:
        h = np.diff(b.breaks) / subdivisions
        starts = (b.breaks[:-1, None] + h[:, None] * np.arange(subdivisions)[None, :]).ravel()
        hs = np.repeat(h, subdivisions)
        xs.append((starts[:, None] + hs[:, None] * q[None, :]).ravel())
        ws.append((hs[:, None] * w[None, :]).ravel())
    grid = np.meshgrid(*xs, indexing="ij")
    wgrid = np.meshgrid(*ws, indexing="ij")
    pts = np.stack([g.ravel() for g in grid], axis=1)
    wt = np.prod(np.stack([g.ravel() for g in wgrid], axis=1), axis=1)
    return pts, wt


def export_coo(matrix: sp.spmatrix, path) -> None:
    """Write 'row col value' lines (all stored entries, 17 significant digits)."""
    a = sp.coo_matrix(matrix)
    order = np.lexsort((a.col, a.row))
    with open(path, "w") as fh:
        for i in order:
            fh.write(f"{a.row[i]} {a.col[i]} {a.data[i]:.17g}\n")


def graded_breaks(lo: float, hi: float, features: Sequence[tuple[float, float]],
                  hmax: float, cells_per_feature: int = 4, growth: float = 1.3) -> np.ndarray:
    """Breakpoints on [lo, hi] that snap to feature edges and grade away from them.

    Each feature (a, b) gets at least ``cells_per_feature`` cells across it;
    the local size grows geometrically with rate ``growth`` away from feature
    edges and is capped at ``hmax``.
    """
    marks = {lo, hi}
    fine = []
    for a, b in features:
        a, b = max(a, lo), min(b, hi)
        if b <= a:
            continue
        marks.update((a, b))
        fine.append((a, b, (b - a) / cells_per_feature))
    marks = np.array(sorted(marks))

    def size(x):
        h = np.full_like(x, hmax)
        for a, b, hf in fine:
            inside = (x >= a) & (x <= b)
            dist = np.where(inside, 0.0, np.minimum(np.abs(x - a), np.abs(x - b)))
            h = np.minimum(h, np.where(inside, hf, hf + (growth - 1.0) * dist))
        return np.minimum(h, hmax)

    out = [marks[0]]
    for a, b in zip(marks[:-1], marks[1:]):
        x = np.linspace(a, b, 2001)
        dens = 1.0 / size(x)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(x))])
        n = max(1, int(math.ceil(cum[-1] - 1e-9)))
        targets = np.linspace(0.0, cum[-1], n + 1)[1:-1]
        out.extend(np.interp(targets, cum, x))
        out.append(b)
    return np.array(out)
