"""Generalized symmetric eigenproblems K v = mu M v for the lowest part of the
spectrum, plus Rayleigh quotients and min-max bounds from trial subspaces."""

from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, eigsh, lobpcg, splu
from scipy.sparse.linalg import norm as spla_norm

log = logging.getLogger(__name__)

DENSE_LIMIT = 60
DIRECT_LIMIT_3D = 9000


@dataclass
class SolverConfig:
    """Eigensolver settings; a shift of None means 1 (callers pass 1/|domain|)."""

    shift: float | None = None
    tol: float = 1e-12
    max_iter: int = 5000
    seed: int = 0
    max_retries: int = 8
    method: str = "auto"

    def __post_init__(self):
        if self.shift is not None and not self.shift > 0:
            raise ValueError("shift must be positive")


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    kernel_count: int | None = None
    converged: bool = True
    shift: float = float("nan")
    info: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.eigenvalues.size

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(f"{v:.17g}") for v in self.eigenvalues],
            "residuals": [float(f"{v:.17g}") for v in self.residuals],
            "kernel_count": self.kernel_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


class FactorizationError(RuntimeError):
    pass


def kernel_size(N: int, m: int) -> int:
    """Dimension of polynomials of degree <= m-1 in N variables."""
    return math.comb(N + m - 1, N)


def residual_norms(K, M, vals: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Normwise backward errors ||Kv - mu Mv|| / ((||K|| + |mu| ||M||) ||v||).

    Scaling by ||Kv|| alone is meaningless for kernel vectors, where Kv is pure
    roundoff.
    """
    r = np.linalg.norm(K @ vecs - (M @ vecs) * vals, axis=0)
    nk = spla_norm(K, 1)
    nm = spla_norm(M, 1)
    return r / ((nk + np.abs(vals) * nm) * np.linalg.norm(vecs, axis=0))


def _ritz(K, M, basis: np.ndarray):
    """Rayleigh-Ritz in span(basis); returns ascending values and M-orthonormal vectors."""
    kb = basis.T @ (K @ basis)
    mb = basis.T @ (M @ basis)
    vals, y = sla.eigh(0.5 * (kb + kb.T), 0.5 * (mb + mb.T))
    return vals, basis @ y


def _polish(K, M, vals: np.ndarray, vecs: np.ndarray, shift: float) -> np.ndarray:
    """Replace inverted-operator values above the shift by Rayleigh quotients.

    1/theta - s loses relative accuracy as theta shrinks; the Rayleigh quotient
    is accurate there but pure roundoff for kernel vectors, so values below the
    shift are kept.
    """
    num = np.einsum("ij,ij->j", vecs, K @ vecs)
    den = np.einsum("ij,ij->j", vecs, M @ vecs)
    return np.where(vals > shift, num / den, vals)


def _factorize(a: sp.spmatrix):
    lu = splu(sp.csc_matrix(a), permc_spec="MMD_AT_PLUS_A")
    diag = lu.U.diagonal()
    if not np.all(np.isfinite(diag)) or np.any(diag == 0):
        raise FactorizationError("shifted matrix is singular")
    return lu


def _start_vector(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal(n)


def _solve_shift_invert(K, M, k, shift, cfg):
    n = K.shape[0]
    last = None
    for attempt in range(cfg.max_retries + 1):
        try:
            lu = _factorize(K + shift * M)
            break
        except (FactorizationError, RuntimeError) as exc:
            last = exc
            log.warning("factorization failed at shift %.3g (%s); doubling", shift, exc)
            shift *= 2.0
    else:
        raise FactorizationError(f"factorization failed after {cfg.max_retries} retries: {last}")
    op = LinearOperator((n, n), matvec=lu.solve, dtype=float)
    ncv = min(n - 1, max(2 * k + 1, k + 20))
    vals, vecs = eigsh(K, k=k, M=M, sigma=-shift, which="LM", OPinv=op, v0=_start_vector(n, cfg.seed),
                       ncv=ncv, tol=cfg.tol, maxiter=cfg.max_iter)
    order = np.argsort(vals)
    return vals[order], vecs[:, order], shift


def _solve_amg(K, M, k, shift, cfg):
    import pyamg

    a = sp.csr_matrix(K + shift * M)
    ml = pyamg.smoothed_aggregation_solver(a, symmetry="symmetric", max_coarse=2000)
    prec = ml.aspreconditioner(cycle="V")
    rng = np.random.default_rng(cfg.seed)
    block = max(k + 4, int(1.25 * k))
    x = rng.standard_normal((K.shape[0], block))
    with warnings.catch_warnings():
        # convergence is judged below from the backward errors of the Ritz pairs
        warnings.simplefilter("ignore", UserWarning)
        _, vecs = lobpcg(a, x, B=M, M=prec, tol=1e-9, maxiter=cfg.max_iter, largest=False)
    return vecs, shift


def solve_generalized(K, M, k: int, cfg: SolverConfig | None = None, dim: int | None = None) -> Spectrum:
    """The k smallest eigenpairs of K v = mu M v, ascending.

    Shift-invert Lanczos on (K + s M)^-1 M with a sparse LU; s is doubled on
    factorization failure. Small problems use a dense solver. Large 3D
    problems (``dim == 3``) switch to LOBPCG with an algebraic multigrid
    preconditioner for K + s M. The computed subspace is always refined by
    a final Rayleigh-Ritz step in the multigrid case.
    """
    cfg = cfg or SolverConfig()
    K = sp.csr_matrix(K)
    M = sp.csr_matrix(M)
    n = K.shape[0]
    if K.shape != M.shape or K.shape[0] != K.shape[1]:
        raise ValueError("K and M must be square of equal size")
    if not 1 <= k <= n:
        raise ValueError(f"k = {k} out of range for dimension {n}")
    shift = cfg.shift if cfg.shift is not None else 1.0
    method = cfg.method
    if method == "auto":
        if n <= DENSE_LIMIT:
            method = "dense"
        elif dim == 3 and n > DIRECT_LIMIT_3D:
            method = "amg"
        else:
            method = "shift-invert"

    if method == "dense":
        # dense shift-invert: mu = 1/theta - s for the largest theta of M x = theta (K + s M) x
        a = (K + shift * M).toarray()
        theta, vecs = sla.eigh(M.toarray(), 0.5 * (a + a.T), subset_by_index=(n - k, n - 1))
        theta, vecs = theta[::-1], vecs[:, ::-1]
        vals = _polish(K, M, 1.0 / theta - shift, vecs, shift)
    elif method == "amg":
        basis, shift = _solve_amg(K, M, k, shift, cfg)
        vals, vecs = _ritz(K, M, basis)
        vals, vecs = vals[:k], vecs[:, :k]
    elif method == "shift-invert":
        # Kernel values come from the inverted operator, which keeps them at
        # roundoff relative to the shift rather than to ||K||.
        vals, vecs, shift = _solve_shift_invert(K, M, k, shift, cfg)
        vals = _polish(K, M, vals, vecs, shift)
    else:
        raise ValueError(f"unknown method {cfg.method!r}")

    res = residual_norms(K, M, vals, vecs)
    converged = bool(np.all(res < (1e-10 if method != "amg" else 1e-6)))
    if not converged:
        log.warning("eigensolver residuals up to %.2e", res.max())
    return Spectrum(vals, vecs, res, None, converged, shift, {"method": method})


def kernel_dimension(s: Spectrum, N: int, m: int, rel_tol: float = 1e-7, strict: bool = True) -> int:
    """Number of computed eigenvalues below rel_tol * mu_{d+1}; checks it equals d."""
    d = kernel_size(N, m)
    if len(s) <= d:
        raise ValueError(f"need more than {d} eigenvalues to test the kernel")
    ref = s.eigenvalues[d]
    count = int(np.sum(np.abs(s.eigenvalues) < rel_tol * ref)) if ref > 0 else len(s)
    s.kernel_count = count
    if strict and count != d:
        raise ValueError(f"kernel has {count} near-zero eigenvalues, expected {d} for N={N}, m={m}")
    return count


def rayleigh_quotient(K, M, v: np.ndarray) -> float:
    v = np.asarray(v, dtype=float)
    den = float(v @ (M @ v))
    if not den > 0:
        raise ValueError("vector has zero mass norm")
    return float(v @ (K @ v)) / den


def minmax_upper_bound(K, M, vectors) -> float:
    """Largest eigenvalue of the pencil reduced to span(vectors); an upper bound for mu_j."""
    v = np.column_stack([np.asarray(x, dtype=float) for x in vectors])
    kb = v.T @ (K @ v)
    mb = v.T @ (M @ v)
    mb = 0.5 * (mb + mb.T)
    try:
        sla.cholesky(mb)
    except np.linalg.LinAlgError as exc:
        raise ValueError("trial vectors are linearly dependent") from exc
    if np.linalg.cond(mb) > 1e13:
        raise ValueError("trial vectors are numerically dependent")
    return float(sla.eigh(0.5 * (kb + kb.T), mb, eigvals_only=True)[-1])
