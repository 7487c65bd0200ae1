import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polydens.density import (
    BoundaryStripWeyl,
    Constant,
    Exponential,
    MultiPoint,
    PiecewiseConstant,
    PointConcentration,
    Scaled,
    SteklovFamily,
    TildeConcentration,
    catalog,
    density_from_config,
    lp_norm,
    mass,
    quadrature_integral,
    weyl_integral,
    with_eps,
)
from polydens.geometry import Ball, BoundaryStrip, Domain, strip_volume, unit_ball_volume


@pytest.mark.parametrize("n", [1, 2, 3])
def test_catalog_closed_forms_match_quadrature(n):
    d = Domain.unit(n)
    for rho in catalog(d, 1, 0.05):
        for p in (1.0, n / 2.0):
            assert rho.power_integral(p) == pytest.approx(quadrature_integral(rho, p), rel=1e-9), rho.kind


def test_point_concentration_mass():
    d = Domain.unit(2)
    eps = 0.01
    rho = PointConcentration(d, 1, eps, 0.1)
    # eps^(2m-N-delta) |Omega| + eps^-N |B_eps|
    expected = eps ** (-0.1) + eps ** -2 * unit_ball_volume(2) * eps ** 2
    assert mass(rho) == pytest.approx(expected, rel=1e-12)
    assert rho.sup() == pytest.approx(eps ** -0.1 + eps ** -2)
    assert rho.essential_inf() == pytest.approx(eps ** -0.1)


def test_boundary_strip_weyl_integral_tends_to_perimeter():
    d = Domain.unit(3)
    vals = [weyl_integral(BoundaryStripWeyl(d, 1, e), 1) for e in (1e-2, 1e-3, 1e-4)]
    assert abs(vals[-1] - 6.0) < abs(vals[0] - 6.0)
    assert vals[-1] == pytest.approx(6.0, rel=1e-3)


def test_steklov_family_mass():
    d = Domain.unit(2)
    rho = SteklovFamily(d, 0.1)
    assert mass(rho) == pytest.approx(0.1 + strip_volume(d, 0.1) / 0.1)


def test_density_evaluate_piecewise():
    d = Domain.unit(2)
    rho = MultiPoint(d, 0.05, ((0.25, 0.5), (0.75, 0.5)))
    v = rho.evaluate(np.array([[0.25, 0.5], [0.5, 0.5], [0.76, 0.51]]))
    assert v == pytest.approx([0.05 + 400.0, 0.05, 0.05 + 400.0])


def test_invalid_parameters():
    d = Domain.unit(2)
    with pytest.raises(ValueError):
        PointConcentration(d, 1, 0.1, delta=0.6)
    with pytest.raises(ValueError):
        PointConcentration(d, 1, 0.6)
    with pytest.raises(ValueError):
        MultiPoint(d, 0.2, ((0.4, 0.5), (0.6, 0.5)))
    with pytest.raises(ValueError):
        BoundaryStripWeyl(d, 1, 0.5)
    with pytest.raises(ValueError):
        Constant(d, 0.0)
    with pytest.raises(ValueError):
        PiecewiseConstant(d, 1.0, (Ball((0.5, 0.5), 0.2), Ball((0.6, 0.5), 0.2)), (2.0, 3.0))


@settings(deadline=None, max_examples=30)
@given(st.floats(0.1, 10.0), st.floats(1e-3, 0.2))
def test_scaling_is_exact(c, eps):
    d = Domain.unit(2)
    rho = TildeConcentration(d, 1, eps)
    s = Scaled(rho, c)
    assert mass(s) == pytest.approx(c * mass(rho), rel=1e-13)
    assert s.sup() == pytest.approx(c * rho.sup(), rel=1e-13)
    assert lp_norm(s, d, 2.0)[1] == pytest.approx(c ** 2 * lp_norm(rho, d, 2.0)[1], rel=1e-13)


def test_with_eps_and_config_roundtrip():
    d = Domain.unit(2)
    rho = density_from_config({"kind": "point_concentration", "eps": 0.1}, d, 1)
    assert with_eps(rho, 0.01).eps == 0.01
    assert with_eps(Constant(d), 0.01) == Constant(d)
    for r in catalog(d, 1, 0.05):
        again = density_from_config({**r.to_dict(), "kind": r.kind}, d, 1)
        assert again.power_integral(1.0) == pytest.approx(r.power_integral(1.0), rel=1e-14)
    with pytest.raises(ValueError):
        density_from_config({"kind": "nope"}, d, 1)


def test_piecewise_constant_regions():
    d = Domain.unit(2)
    rho = PiecewiseConstant(d, 1.0, (Ball((0.3, 0.3), 0.1), Domain(((0.6, 0.9), (0.6, 0.9))),
                                     BoundaryStrip(0.05)), (5.0, 2.0, 3.0))
    assert mass(rho) == pytest.approx(quadrature_integral(rho, 1.0), rel=1e-9)


def test_exponential_density():
    d = Domain.unit(2)
    rho = Exponential(d, 2.0, (1.0, -0.5))
    exact = 2.0 * (np.e - 1.0) * (1.0 - np.exp(-0.5)) / 0.5
    assert mass(rho) == pytest.approx(exact, rel=1e-13)
    assert rho.sup() == pytest.approx(2.0 * np.e)
