"""Recovery of systematic factor realisations from realized credit losses."""

from __future__ import annotations

import datetime as dt
import enum
from dataclasses import dataclass, field

from .engine import Book, Mode
from .errors import CoverageError, InfeasibleError
from .mathkernel import FACTOR_BRACKET, FACTOR_TOL, find_root_monotone, norm_sf
from .portfolio import DEFAULT_INPUT_LEAD, QuarterSeries, missing_inputs, shift_quarter, window_quarters

LAGS = (0, 1, 2)


class Allocation(enum.Enum):
    PROPORTIONAL_RWA = "proportional-rwa"
    ALL_TO_IRB = "all-to-irb"


@dataclass(frozen=True)
class FactorReading:
    quarter: dt.date
    y: float
    alpha: float
    lag_quarters: int
    allocation: Allocation
    window_losses: float


@dataclass(frozen=True)
class FactorSeries:
    readings: list = field(default_factory=list)
    gaps: list = field(default_factory=list)  # (quarter, reason)


def solve_factor(book: Book, target: float, bracket=FACTOR_BRACKET, tol=FACTOR_TOL,
                 what: str = "loss") -> float:
    """Factor value y at which the book's conditional loss equals ``target``.

    Raises InfeasibleError when ``target`` is not strictly inside the
    conditional loss range over ``bracket``.
    """
    lo, hi = bracket
    high_loss = book.conditional_loss(lo)
    low_loss = book.conditional_loss(hi)
    if not low_loss < target < high_loss:
        raise InfeasibleError(f"{what} not attainable on y in [{lo:g}, {hi:g}]", target, (low_loss, high_loss))
    return find_root_monotone(lambda y: book.conditional_loss(y) - target, lo, hi, tol)


def _check_lag(lag):
    if lag not in LAGS:
        raise ValueError(f"lag must be one of {LAGS}, got {lag!r}")


def allocate_losses(series: QuarterSeries, t: dt.date, lag: int = 0,
                    allocation: Allocation = Allocation.PROPORTIONAL_RWA,
                    input_lead: int = DEFAULT_INPUT_LEAD) -> float:
    """IRB share of credit losses over the four quarters s-1 .. s+2, s = t + lag.

    Proportional allocation uses the IRB / credit RWA ratio at ``t - input_lead``.
    """
    _check_lag(lag)
    base = shift_quarter(t, -input_lead)
    missing = [f"loss {q.isoformat()}" for q in window_quarters(t, lag) if q not in series.losses]
    if allocation is Allocation.PROPORTIONAL_RWA and base not in series.accounts:
        missing.insert(0, f"accounts {base.isoformat()}")
    if missing:
        raise CoverageError(f"quarter {t.isoformat()} uncomputable: missing {', '.join(missing)}")
    total = sum(series.loss(q) for q in window_quarters(t, lag))
    if allocation is Allocation.ALL_TO_IRB:
        return total
    acc = series.account(base)
    return acc.rwa_irb / acc.rwa_credit * total


def recover_factor(series: QuarterSeries, t: dt.date, lag: int = 0,
                   allocation: Allocation = Allocation.PROPORTIONAL_RWA,
                   input_lead: int = DEFAULT_INPUT_LEAD,
                   bracket=FACTOR_BRACKET, tol=FACTOR_TOL) -> FactorReading:
    """Solve allocated window losses = regulatory conditional loss of the t - input_lead book."""
    _check_lag(lag)
    missing = missing_inputs(series, t, lag, input_lead)
    if missing:
        raise CoverageError(f"quarter {t.isoformat()} uncomputable: missing {', '.join(missing)}")
    losses = allocate_losses(series, t, lag, allocation, input_lead)
    book = Book.from_snapshot(series.snapshot(shift_quarter(t, -input_lead)), Mode.REGULATORY)
    y = solve_factor(book, losses, bracket, tol, what=f"window loss for {t.isoformat()}")
    return FactorReading(quarter=t, y=y, alpha=norm_sf(y), lag_quarters=lag,
                         allocation=allocation, window_losses=losses)


def factor_series(series: QuarterSeries, lag: int = 0,
                  allocation: Allocation = Allocation.PROPORTIONAL_RWA,
                  input_lead: int = DEFAULT_INPUT_LEAD, **solver) -> FactorSeries:
    """One reading per quarter with full coverage.

    Quarters lacking inputs, or whose losses are not attainable, are skipped
    and listed in ``gaps`` with the reason.
    """
    _check_lag(lag)
    readings, gaps = [], []
    for t in series.quarters:
        missing = missing_inputs(series, t, lag, input_lead)
        if missing:
            gaps.append((t, "missing " + ", ".join(missing)))
            continue
        try:
            readings.append(recover_factor(series, t, lag, allocation, input_lead, **solver))
        except InfeasibleError as exc:
            gaps.append((t, str(exc)))
    return FactorSeries(readings=readings, gaps=gaps)
