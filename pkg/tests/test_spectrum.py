import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
import scipy.sparse as sp

from polydens.density import PointConcentration
from polydens.discretization import assemble_mass, assemble_stiffness, build_space, interpolate
from polydens.experiments import graded_space, solve_density
from polydens.geometry import Domain
from polydens.spectrum import (
    SolverConfig,
    kernel_dimension,
    kernel_size,
    minmax_upper_bound,
    rayleigh_quotient,
    residual_norms,
    solve_generalized,
)


def _pencil(n, m, elements, rho=1.0):
    space = build_space(Domain.unit(n), m, elements=elements)
    return space, assemble_stiffness(space), assemble_mass(space, rho)


def test_kernel_size():
    assert [kernel_size(1, 1), kernel_size(1, 3), kernel_size(2, 2), kernel_size(3, 2)] == [1, 3, 3, 4]


def test_string_spectrum():
    _, K, M = _pencil(1, 1, 128)
    s = solve_generalized(K, M, 6, SolverConfig(shift=1.0))
    exact = (np.pi * np.arange(6)) ** 2
    assert s.converged
    assert np.allclose(s.eigenvalues[1:], exact[1:], rtol=1e-6)
    assert abs(s.eigenvalues[0]) < 1e-9


def test_dense_and_shift_invert_agree():
    _, K, M = _pencil(2, 2, 6)
    a = solve_generalized(K, M, 8, SolverConfig(method="dense"))
    b = solve_generalized(K, M, 8, SolverConfig(method="shift-invert"))
    assert np.allclose(a.eigenvalues[3:], b.eigenvalues[3:], rtol=1e-9)
    assert np.all(np.abs(a.eigenvalues[:3]) < 1e-8 * a.eigenvalues[3])


def test_multigrid_route_agrees_with_direct():
    _, K, M = _pencil(3, 1, 8)
    a = solve_generalized(K, M, 5, SolverConfig(method="amg"))
    b = solve_generalized(K, M, 5, SolverConfig(method="shift-invert"))
    assert a.converged
    assert np.allclose(a.eigenvalues[1:], b.eigenvalues[1:], rtol=1e-7)


def test_residuals_are_backward_errors():
    _, K, M = _pencil(1, 2, 20)
    s = solve_generalized(K, M, 5)
    assert np.all(s.residuals < 1e-10)
    bad = residual_norms(K, M, s.eigenvalues[2:] * 1.1, s.eigenvectors[:, 2:])
    assert np.all(bad > 1e3 * s.residuals[2:])


def test_eigenvectors_are_mass_orthogonal():
    _, K, M = _pencil(2, 1, 8)
    s = solve_generalized(K, M, 6)
    G = s.eigenvectors.T @ (M @ s.eigenvectors)
    G /= np.sqrt(np.outer(np.diag(G), np.diag(G)))
    assert np.allclose(G, np.eye(6), atol=1e-8)


@pytest.mark.parametrize("n,m,elements", [(1, 1, 32), (1, 2, 32), (1, 3, 32), (2, 1, 8), (2, 2, 8)])
def test_kernel_dimension(n, m, elements):
    _, K, M = _pencil(n, m, elements)
    s = solve_generalized(K, M, kernel_size(n, m) + 2)
    assert kernel_dimension(s, n, m) == kernel_size(n, m)


def test_kernel_dimension_detects_wrong_count():
    _, K, M = _pencil(1, 1, 16)
    s = solve_generalized(K, M, 4)
    with pytest.raises(ValueError):
        kernel_dimension(s, 1, 2)
    assert kernel_dimension(s, 1, 2, strict=False) == 1


def test_scaling_of_density():
    d = Domain.unit(2)
    space = build_space(d, 1, elements=8)
    rho = PointConcentration(d, 1, 0.1)
    K = assemble_stiffness(space)
    a = solve_generalized(K, assemble_mass(space, rho), 6)
    b = solve_generalized(K, assemble_mass(space, rho.scaled(3.0)), 6)
    assert np.allclose(b.eigenvalues[1:] * 3.0, a.eigenvalues[1:], rtol=1e-10)


def test_rayleigh_and_minmax():
    space, K, M = _pencil(1, 1, 64)
    c = interpolate(space, lambda x: np.cos(np.pi * x[:, 0]))
    assert rayleigh_quotient(K, M, c) == pytest.approx(np.pi ** 2, rel=1e-4)
    s = solve_generalized(K, M, 4)
    vecs = [interpolate(space, lambda x, k=k: np.cos(k * np.pi * x[:, 0])) for k in range(3)]
    assert minmax_upper_bound(K, M, vecs) >= s.eigenvalues[2] * (1 - 1e-12)
    with pytest.raises(ValueError):
        minmax_upper_bound(K, M, [vecs[1], 2 * vecs[1]])


def test_bad_arguments():
    _, K, M = _pencil(1, 1, 8)
    with pytest.raises(ValueError):
        solve_generalized(K, M, 0)
    with pytest.raises(ValueError):
        solve_generalized(K, M[:-1, :-1], 2)
    with pytest.raises(ValueError):
        SolverConfig(shift=-1.0)
    with pytest.raises(ValueError):
        solve_generalized(K, M, 2, SolverConfig(method="magic"))


def test_deterministic():
    _, K, M = _pencil(2, 1, 10)
    a = solve_generalized(K, M, 5, SolverConfig(seed=3))
    b = solve_generalized(K, M, 5, SolverConfig(seed=3))
    assert np.array_equal(a.eigenvalues, b.eigenvalues)



@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 20.0))
def test_spectrum_scales_inversely_with_density(c):
    rho = PointConcentration(Domain.interval(), 1, 0.05)
    space = graded_space(rho, 1, 16)
    base = solve_density(rho, 1, 6, space).eigenvalues
    mu = solve_density(rho.scaled(c), 1, 6, space).eigenvalues
    assert np.allclose(c * mu[1:], base[1:], rtol=1e-10, atol=0)
