import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polydens.bounds import (
    CONJECTURE_NOTE,
    CSV_HEADER,
    BoundKind,
    BoundReport,
    make_report,
    structural_factor,
    uniformity_verdict,
    verdict_note,
    weyl_reference,
    write_reports_csv,
)


def test_weyl_reference_examples():
    assert weyl_reference(1, 1, 3, 1.0) == pytest.approx(math.pi ** 2 * 9)
    assert weyl_reference(2, 1, 5, 1.0) == pytest.approx(4 * math.pi * 5)


@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 200))
def test_weyl_power_law(n, m, j):
    ratio = weyl_reference(n, m, 4 * j, 1.3) / weyl_reference(n, m, j, 1.3)
    assert ratio == pytest.approx(4 ** (2 * m / n), rel=1e-12)


def test_factor_examples():
    assert structural_factor(BoundKind.Krein, 1, 1, 1, 1.0, 1.0, 1.0, 1.0) == pytest.approx(math.pi ** 2)
    for j in (1, 2, 7):
        assert structural_factor(BoundKind.UpperMass_Nge2m, 2, 1, j, 1.0, 1.0, 1.0, 1.0) == pytest.approx(j)
        assert structural_factor(BoundKind.UpperMass_Nlt2m, 1, 1, j, 1.0, 1.0, 1.0, 1.0) == pytest.approx(j ** 2)


def test_applicability():
    assert BoundKind.UpperMass_Nge2m.applies(2, 1)
    assert not BoundKind.UpperMass_Nge2m.applies(1, 1)
    assert BoundKind.Krein.applies(1, 1) and not BoundKind.Krein.applies(1, 2)
    assert BoundKind.LowerLp.applies(3, 1) and not BoundKind.LowerLp.applies(2, 1)
    with pytest.raises(ValueError):
        structural_factor(BoundKind.UpperMass_Nge2m, 1, 1, 1, 1.0, 1.0, 1.0, 1.0)
    assert structural_factor(BoundKind.UpperMass_Nge2m, 1, 1, 1, 1.0, 1.0, 1.0, 1.0, strict=False) > 0


# kinds, the (N, m) they are evaluated at, and the exponent of c in factor(c rho) / factor(rho)
_HOMOGENEITY = [
    (BoundKind.UpperMass_Nge2m, 2, 1, -1.0),
    (BoundKind.UpperMass_Nge2m, 3, 1, -1.0),
    (BoundKind.UpperMass_Nlt2m, 1, 1, -1.0),
    (BoundKind.UpperMass_Nlt2m, 2, 2, -1.0),
    (BoundKind.Krein, 1, 1, -1.0),
    (BoundKind.WeylType_Nle2m, 1, 1, -1.0),
    (BoundKind.WeylType_Nle2m, 2, 1, -1.0),
    (BoundKind.WeylType_Ngt2m, 3, 1, -1.0),
    (BoundKind.ConjecturedWeyl, 1, 1, -1.0),
    (BoundKind.LowerMass, 1, 1, -1.0),
    (BoundKind.LowerLp, 3, 1, -1.0),
]


@pytest.mark.parametrize("kind,n,m,power", _HOMOGENEITY)
@given(c=st.floats(0.01, 100.0))
def test_factor_homogeneity_matches_eigenvalue_scaling(kind, n, m, power, c):
    # mu_j[c rho] = mu_j[rho] / c, so every factor must scale as c^-1
    mass, sup, vol = 2.5, 7.0, 1.3
    lp = 1.7
    q = n / (2.0 * m)
    base = structural_factor(kind, n, m, 3, mass, lp, sup, vol)
    scaled = structural_factor(kind, n, m, 3, c * mass, c ** q * lp, c * sup, vol)
    assert scaled / base == pytest.approx(c ** power, rel=1e-12)


def test_verdicts():
    reps = [make_report(BoundKind.UpperMass_Nge2m, 2, 1, 2, e, mu, 1.0, 1.0, 1.0, 1.0)
            for e, mu in [(0.1, 3.0), (0.01, 5.0)]]
    assert uniformity_verdict(reps) == pytest.approx(5.0 / 2.0)
    low = [make_report(BoundKind.LowerMass, 1, 1, 2, e, mu, 2.0, 1.0, 1.0, 1.0) for e, mu in [(0.1, 3.0), (0.01, 5.0)]]
    assert uniformity_verdict(low) == pytest.approx(6.0)
    assert uniformity_verdict(reps[:1]) == reps[0].ratio
    with pytest.raises(ValueError):
        uniformity_verdict(reps + low)
    with pytest.raises(ValueError):
        uniformity_verdict([])


def test_notes():
    assert verdict_note(BoundKind.ConjecturedWeyl, 1, 1) == CONJECTURE_NOTE
    assert verdict_note(BoundKind.UpperMass_Nge2m, 2, 1) == ""
    assert "inapplicable" in verdict_note(BoundKind.UpperMass_Nge2m, 1, 1)


def test_csv_rows(tmp_path):
    r = BoundReport(BoundKind.Krein, 1, 1, 2, 0.1, 10.0, 4.0)
    write_reports_csv([r], tmp_path / "b.csv")
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0].split(",") == CSV_HEADER
    assert lines[1].split(",")[-1] == "2.5"
