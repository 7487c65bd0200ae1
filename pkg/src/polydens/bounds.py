"""Eigenvalue bound expressions with unknown constants set to 1, the Weyl
reference value, and ratio bookkeeping across density families."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .geometry import unit_ball_volume

CONJECTURE_NOTE = "conjecture - not falsifiable by boundedness"


class BoundKind(enum.Enum):
    UpperMass_Nge2m = "UpperMass_Nge2m"
    UpperMass_Nlt2m = "UpperMass_Nlt2m"
    Krein = "Krein"
    WeylType_Nle2m = "WeylType_Nle2m"
    WeylType_Ngt2m = "WeylType_Ngt2m"
    ConjecturedWeyl = "ConjecturedWeyl"
    LowerMass = "LowerMass"
    LowerLp = "LowerLp"

    def applies(self, N: int, m: int) -> bool:
        return {
            BoundKind.UpperMass_Nge2m: N >= 2 * m,
            BoundKind.UpperMass_Nlt2m: N < 2 * m,
            BoundKind.Krein: N == 1 and m == 1,
            BoundKind.WeylType_Nle2m: N <= 2 * m,
            BoundKind.WeylType_Ngt2m: N > 2 * m,
            BoundKind.ConjecturedWeyl: N <= 2 * m,
            BoundKind.LowerMass: N < 2 * m,
            BoundKind.LowerLp: N > 2 * m,
        }[self]

    @property
    def is_lower(self) -> bool:
        return self in (BoundKind.LowerMass, BoundKind.LowerLp)


def weyl_reference(N: int, m: int, j: float, lp_integral: float) -> float:
    """(2 pi)^(2m) omega_N^(-2m/N) (j / int rho^(N/2m))^(2m/N)."""
    if min(N, m, j, lp_integral) <= 0:
        raise ValueError("inputs must be positive")
    e = 2.0 * m / N
    return (2.0 * math.pi) ** (2 * m) * unit_ball_volume(N) ** (-e) * (j / lp_integral) ** e


def structural_factor(kind: BoundKind, N: int, m: int, j: int, mass: float, lp_integral: float,
                      sup: float, vol: float, strict: bool = True) -> float:
    """The j- and rho-dependent part of a bound; lp_integral is int rho^(N/2m).

    Lower-bound kinds ignore j (they concern the first nonzero eigenvalue).
    With strict=False an inapplicable (N, m) is evaluated anyway, which is how
    the counterexample families are exhibited.
    """
    kind = BoundKind(kind)
    if strict and not kind.applies(N, m):
        raise ValueError(f"{kind.value} does not apply to N={N}, m={m}")
    e = 2.0 * m / N
    if kind is BoundKind.UpperMass_Nge2m:
        f = (vol / mass) * (j / vol) ** e
    elif kind is BoundKind.UpperMass_Nlt2m:
        f = sup ** (e - 1.0) * j ** e / mass ** e
    elif kind is BoundKind.Krein:
        f = math.pi ** 2 * sup * j ** 2 / mass ** 2
    elif kind is BoundKind.WeylType_Nle2m:
        f = (vol * sup ** (1.0 / e) / lp_integral) ** (e - 1.0) * (j / lp_integral) ** e
    elif kind is BoundKind.WeylType_Ngt2m:
        f = (vol * sup ** (1.0 / e) / lp_integral) ** (1.0 - e) * (j / lp_integral) ** e
    elif kind is BoundKind.ConjecturedWeyl:
        f = (j / lp_integral) ** e
    elif kind is BoundKind.LowerMass:
        f = 1.0 / mass
    else:
        f = lp_integral ** (-e)
    if not f > 0:
        raise ValueError("bound factor must be positive")
    return f


@dataclass
class BoundReport:
    kind: BoundKind
    N: int
    m: int
    j: int
    eps: float
    mu_j: float
    factor: float

    @property
    def ratio(self) -> float:
        return self.mu_j / self.factor

    def row(self) -> list:
        return [self.kind.value, self.N, self.m, self.j, f"{self.eps:.17g}", f"{self.mu_j:.17g}",
                f"{self.factor:.17g}", f"{self.ratio:.17g}"]


CSV_HEADER = ["kind", "N", "m", "j", "eps", "mu_j", "factor", "ratio"]


def make_report(kind: BoundKind, N: int, m: int, j: int, eps: float, mu_j: float, mass: float,
                lp_integral: float, sup: float, vol: float, strict: bool = True) -> BoundReport:
    f = structural_factor(kind, N, m, j, mass, lp_integral, sup, vol, strict)
    return BoundReport(BoundKind(kind), N, m, j, eps, mu_j, f)


def uniformity_verdict(reports: Sequence[BoundReport]) -> float:
    """sup of mu_j / factor for upper-bound kinds, inf for lower-bound kinds."""
    if not reports:
        raise ValueError("no reports")
    kinds = {r.kind for r in reports}
    if len(kinds) != 1:
        raise ValueError("reports mix bound kinds")
    ratios = [r.ratio for r in reports]
    return min(ratios) if reports[0].kind.is_lower else max(ratios)


def verdict_note(kind: BoundKind, N: int, m: int) -> str:
    kind = BoundKind(kind)
    if kind is BoundKind.ConjecturedWeyl and N < 2 * m:
        return CONJECTURE_NOTE
    return "" if kind.applies(N, m) else "inapplicable: divergence expected"


def write_reports_csv(reports: Iterable[BoundReport], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in reports:
            w.writerow(r.row())
