import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st
from scipy.interpolate import BSpline

from polydens.density import PointConcentration, SteklovFamily
from polydens.discretization import (
    CLAMPED,
    SplineBasis,
    assemble_boundary_mass,
    assemble_mass,
    assemble_stiffness,
    build_space,
    export_coo,
    graded_breaks,
    interpolate,
    multi_indices,
    project,
    prolongation,
    refine,
)
from polydens.geometry import Ball, Domain


def test_basis_matches_scipy(rng):
    br = np.sort(np.concatenate([[0.0, 1.0], rng.uniform(0, 1, 5)]))
    b = SplineBasis(br, 3)
    x = rng.uniform(0, 1, 50)
    for d in range(3):
        ours = b.collocation(x, d).toarray()
        for i in range(b.n_basis):
            c = np.zeros(b.n_basis)
            c[i] = 1.0
            ref = BSpline(b.knots, c, 3).derivative(d)(x) if d else BSpline(b.knots, c, 3)(x)
            assert np.allclose(ours[:, i], ref, atol=1e-10)


def test_partition_of_unity(rng):
    b = SplineBasis(np.linspace(0, 2, 7), 2)
    x = rng.uniform(0, 2, 100)
    assert np.allclose(b.collocation(x).sum(axis=1), 1.0)


def test_hand_computed_linear_matrices():
    # hat functions on two elements of length 1/2 on (0, 1), degree 1
    space = build_space(Domain.interval(), 1, elements=2, degree=1)
    K = assemble_stiffness(space).toarray()
    M = assemble_mass(space, 1.0).toarray()
    B = assemble_boundary_mass(space).toarray()
    assert np.allclose(K, [[2, -2, 0], [-2, 4, -2], [0, -2, 2]])
    assert np.allclose(M, [[1 / 6, 1 / 12, 0], [1 / 12, 1 / 3, 1 / 12], [0, 1 / 12, 1 / 6]])
    assert np.allclose(B, np.diag([1.0, 0.0, 1.0]))


@pytest.mark.parametrize("n,m", [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1)])
def test_polynomials_of_degree_below_m_have_zero_energy(n, m):
    space = build_space(Domain.unit(n), m, elements=3)
    K = assemble_stiffness(space)
    for order in range(m):
        for alpha in multi_indices(n, order):
            c = interpolate(space, lambda x, a=alpha: np.prod(x ** np.array(a), axis=1))
            assert np.linalg.norm(K @ c) < 1e-10 * max(1.0, np.linalg.norm(K.data))


def test_stiffness_energy_of_quadratic():
    # each multi-index counted once: int (2y)^2 + (2x)^2 + 0 over the unit square = 8/3
    space = build_space(Domain.unit(2), 2, elements=3, degree=2)
    c = interpolate(space, lambda x: x[:, 0] ** 2 * x[:, 1])
    K = assemble_stiffness(space)
    assert float(c @ K @ c) == pytest.approx(8.0 / 3.0, rel=1e-12)


def test_mass_total():
    space = build_space(Domain(((0, 2), (0, 1))), 1, elements=4)
    one = interpolate(space, lambda x: np.ones(len(x)))
    assert float(one @ assemble_mass(space, 3.0) @ one) == pytest.approx(6.0, rel=1e-13)


@pytest.mark.parametrize("n", [2, 3])
def test_ball_quadrature_volume(n):
    space = build_space(Domain.unit(n), 1, elements=8)
    rho = PointConcentration(Domain.unit(n), 1, 0.2, 0.1)
    one = interpolate(space, lambda x: np.ones(len(x)))
    M, rep = assemble_mass(space, rho, return_report=True)
    assert float(one @ M @ one) == pytest.approx(rho.power_integral(1.0), rel=2e-3)
    assert rep.max_volume_error < 2e-3


def test_clamped_space_dimension():
    space = build_space(Domain.interval(), 2, elements=5, bc=CLAMPED, degree=3)
    assert space.ndof == 5 + 3 - 4
    with pytest.raises(ValueError):
        assemble_boundary_mass(space)
    with pytest.raises(ValueError):
        build_space(Domain.unit(2), 1, bc=CLAMPED)


def test_nonconforming_degree_rejected():
    with pytest.raises(ValueError):
        build_space(Domain.interval(), 3, degree=2)


@pytest.mark.parametrize("n", [1, 2])
def test_refinement_is_nested(n, rng):
    coarse = build_space(Domain.unit(n), 2, elements=3)
    fine = refine(coarse)
    P = prolongation(coarse, fine)
    c = rng.standard_normal(coarse.ndof)
    pts = rng.uniform(0, 1, (40, n))
    assert np.allclose(coarse.evaluate(c, pts), fine.evaluate(P @ c, pts), atol=1e-12)
    Kc, Kf = assemble_stiffness(coarse), assemble_stiffness(fine)
    assert np.allclose((P.T @ Kf @ P).toarray(), Kc.toarray(), atol=1e-9)


def test_projection_of_spline_is_exact(rng):
    space = build_space(Domain.unit(2), 1, elements=4)
    c = rng.standard_normal(space.ndof)
    proj = project(lambda x: space.evaluate(c, x), space, rho=SteklovFamily(Domain.unit(2), 0.25))
    assert np.allclose(proj.coeffs, c, atol=1e-8)
    assert proj.relative_error < 1e-10


def test_boundary_mass_perimeter():
    space = build_space(Domain.unit(2), 1, elements=3)
    one = interpolate(space, lambda x: np.ones(len(x)))
    assert float(one @ assemble_boundary_mass(space) @ one) == pytest.approx(4.0)


def test_export_coo(tmp_path):
    a = sp.csr_matrix(np.array([[1.0, 0.0], [1 / 3, 2.0]]))
    export_coo(a, tmp_path / "a.txt")
    lines = (tmp_path / "a.txt").read_text().splitlines()
    assert lines == ["0 0 1", "1 0 0.33333333333333331", "1 1 2"]


@settings(deadline=None, max_examples=40)
@given(st.floats(0.0, 0.9), st.floats(0.001, 0.05))
def test_graded_breaks_resolve_features(a, w):
    b = min(a + w, 1.0)
    br = graded_breaks(0.0, 1.0, [(a, b)], 0.1)
    assert br[0] == 0.0 and br[-1] == 1.0 and np.all(np.diff(br) > 0)
    assert a in br and b in br
    inside = np.sum((br[:-1] >= a) & (br[1:] <= b))
    assert inside >= 4
    assert np.max(np.diff(br)) <= 0.1 + 1e-12
