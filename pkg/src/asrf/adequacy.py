"""Distance to default, capital ratios and reverse stress tests against ratio floors."""

from __future__ import annotations

import datetime as dt
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

from .engine import Book, Mode
from .errors import CoverageError, InfeasibleError, ValidationError
from .factor import Allocation, factor_series, solve_factor
from .mathkernel import FACTOR_BRACKET, FACTOR_TOL, norm_cdf, norm_sf
from .portfolio import CapitalAccounts, QuarterSeries

log = logging.getLogger(__name__)

DEFAULT_FLOORS = (0.04, 0.08)


@dataclass(frozen=True)
class SolvencyReading:
    quarter: dt.date
    provisions_irb: float
    capital_irb: float
    capital_ratio: float
    dtd: float
    dtd_alpha: float
    provision_shortfall: bool = False


@dataclass(frozen=True)
class StressReading:
    quarter: dt.date
    floor: float
    y_hat: float
    alpha_hat: float
    loss_threshold: float


def _inputs(series: QuarterSeries, t: dt.date):
    if t not in series.snapshots:
        raise CoverageError(f"no snapshot for quarter {t.isoformat()}")
    if t not in series.accounts:
        raise CoverageError(f"no capital accounts for quarter {t.isoformat()}")
    return series.snapshots[t], series.accounts[t]


def provision_share(irb_expected_loss: float, non_irb_expected_loss: float) -> float:
    total = irb_expected_loss + non_irb_expected_loss
    if not total > 0:
        raise ValidationError("projected expected loss is zero; provision share undefined")
    return irb_expected_loss / total


def allocate_provisions(series: QuarterSeries, t: dt.date) -> float:
    """IRB share of provisions, split in proportion to one-year expected loss.

    The IRB expectation is the regulatory expected loss of the snapshot at
    ``t``; the non-IRB expectation is the reported scalar on the accounts.
    """
    snapshot, acc = _inputs(series, t)
    if acc.provisions == 0.0:
        return 0.0
    irb_el = Book.from_snapshot(snapshot, Mode.REGULATORY).expected_loss()
    return provision_share(irb_el, acc.non_irb_expected_loss) * acc.provisions


def allocate_capital(accounts: CapitalAccounts) -> float:
    """IRB share of the capital base in proportion to RWA."""
    return accounts.rwa_irb / accounts.rwa_total * accounts.capital_base


def capital_ratio(accounts: CapitalAccounts) -> float:
    return accounts.capital_base / accounts.rwa_total


class _Quarter:
    """Per-quarter resources shared by the insolvency and stress solvers."""

    def __init__(self, series, t):
        snapshot, self.accounts = _inputs(series, t)
        self.book = Book.from_snapshot(snapshot, Mode.REGULATORY)
        irb_el = self.book.expected_loss()
        self.expected_loss = irb_el
        if self.accounts.provisions == 0.0:
            self.provisions = 0.0
        else:
            self.provisions = provision_share(irb_el, self.accounts.non_irb_expected_loss) * self.accounts.provisions
        self.capital = allocate_capital(self.accounts)


def distance_to_default(series: QuarterSeries, t: dt.date,
                        bracket=FACTOR_BRACKET, tol=FACTOR_TOL) -> SolvencyReading:
    """Solve IRB provisions + capital = regulatory conditional loss for the factor.

    The distance to default is the negated root; its confidence is Phi(dtd).
    A provision shortfall against regulatory expected loss is flagged, not
    deducted.
    """
    q = _Quarter(series, t)
    resources = q.provisions + q.capital
    shortfall = q.provisions < q.expected_loss
    if shortfall:
        log.warning("quarter %s: IRB provisions %.6g below expected loss %.6g",
                    t.isoformat(), q.provisions, q.expected_loss)
    y = solve_factor(q.book, resources, bracket, tol, what=f"provisions plus capital at {t.isoformat()}")
    d = -y
    return SolvencyReading(
        quarter=t,
        provisions_irb=q.provisions,
        capital_irb=q.capital,
        capital_ratio=capital_ratio(q.accounts),
        dtd=d,
        dtd_alpha=norm_cdf(d),
        provision_shortfall=shortfall,
    )


def reverse_stress(series: QuarterSeries, t: dt.date, floor: float,
                   bracket=FACTOR_BRACKET, tol=FACTOR_TOL) -> StressReading:
    """Weakest factor shock whose conditional loss breaches the capital ratio ``floor``."""
    if not floor >= 0:
        raise ValueError(f"floor must be >= 0, got {floor!r}")
    q = _Quarter(series, t)
    threshold = q.provisions + q.capital - floor * q.accounts.rwa_irb
    if not threshold > 0:
        raise InfeasibleError(f"floor {floor:g} at {t.isoformat()} leaves no loss-absorbing resources",
                              threshold, (q.book.conditional_loss(bracket[1]), q.book.conditional_loss(bracket[0])))
    y_hat = solve_factor(q.book, threshold, bracket, tol, what=f"breach threshold at {t.isoformat()}")
    return StressReading(quarter=t, floor=floor, y_hat=y_hat, alpha_hat=norm_sf(y_hat),
                         loss_threshold=threshold)


@dataclass(frozen=True)
class ReportRow:
    quarter: dt.date
    solvency: SolvencyReading
    stress: tuple  # StressReading per floor
    factor_y: Optional[float]
    factor_alpha: Optional[float]


def adequacy_report(series: QuarterSeries, floors: Sequence[float] = DEFAULT_FLOORS, lag: int = 0,
                    allocation: Allocation = Allocation.PROPORTIONAL_RWA) -> list[ReportRow]:
    """Capital ratio, distance to default, stress shocks and prevailing factor per quarter."""
    readings = {r.quarter: r for r in factor_series(series, lag, allocation).readings}
    rows = []
    for t in sorted(series.snapshots):
        if t not in series.accounts:
            continue
        solv = distance_to_default(series, t)
        stress = tuple(reverse_stress(series, t, f) for f in floors)
        r = readings.get(t)
        rows.append(ReportRow(t, solv, stress, r.y if r else None, r.alpha if r else None))
    return rows
