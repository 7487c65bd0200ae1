import numpy as np
import pytest

from polydens.density import BoundaryStripWeyl, PointConcentration
from polydens.geometry import Annulus, Ball, Domain
from polydens.gny import (
    decompose,
    doubles_disjoint,
    measure_space,
    radius_floor,
    uniform_measure_space,
    verify,
)


def test_doubles_disjoint():
    assert doubles_disjoint(Ball((0.0, 0.0), 0.1), Ball((0.5, 0.0), 0.1))
    assert not doubles_disjoint(Ball((0.0, 0.0), 0.1), Ball((0.3, 0.0), 0.1))
    # a ball deep inside the hole of an annulus
    assert doubles_disjoint(Ball((0.0, 0.0), 0.05), Annulus((0.0, 0.0), 0.4, 0.5))
    assert not doubles_disjoint(Ball((0.0, 0.0), 0.15), Annulus((0.0, 0.0), 0.4, 0.5))


def test_sampled_measure_total():
    rho = PointConcentration(Domain.unit(2), 1, 0.05)
    errs = [abs(measure_space(rho, cells=16, sub=sub).total / rho.power_integral(1.0) - 1.0) for sub in (4, 16)]
    assert errs[1] < errs[0]
    assert errs[1] < 5e-3


@pytest.mark.parametrize("j", [1, 2, 5])
def test_uniform_decomposition(j):
    ms = uniform_measure_space(Domain.unit(2), cells=16)
    dec = decompose(ms, j)
    rep = verify(dec, ms, j)
    assert rep.passed, rep.clauses
    assert len(dec.regions) == j


def test_single_region_takes_everything():
    ms = uniform_measure_space(Domain.unit(2), cells=16)
    dec = decompose(ms, 1)
    assert dec.c_emp == pytest.approx(1.0)


def test_verify_catches_overlap():
    ms = uniform_measure_space(Domain.unit(2), cells=16)
    dec = decompose(ms, 2)
    dec.regions = [Ball((0.4, 0.5), 0.2), Ball((0.6, 0.5), 0.2)]
    rep = verify(dec, ms, 2)
    assert not rep.clauses["disjoint_doubles"]
    assert not rep.clauses["measures_match"]


def test_strip_density_decomposition():
    rho = BoundaryStripWeyl(Domain.unit(2), 1, 0.02)
    ms = measure_space(rho, cells=24)
    dec = decompose(ms, 4)
    rep = verify(dec, ms, 4, c_min=0.01)
    assert rep.passed, rep.clauses


def test_radius_floor_monotone():
    ms = uniform_measure_space(Domain.unit(2), cells=8)
    assert radius_floor(ms, 4, 0.5) < radius_floor(ms, 2, 0.5)


def test_json_schema():
    ms = uniform_measure_space(Domain.unit(2), cells=8)
    data = decompose(ms, 2).to_dict()
    assert set(data) == {"centers", "radii", "measures", "c_emp"}
