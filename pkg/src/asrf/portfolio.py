"""Domain model: obligor grades, quarterly snapshots, capital accounts and loss series.

Currency amounts are plain floats in millions. Quarters are keyed by the
``datetime.date`` of the calendar quarter end.
"""

from __future__ import annotations

import calendar
import datetime as dt
import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import CoverageError, ValidationError

# Quarters between the input snapshot and the factor reading it informs.
DEFAULT_INPUT_LEAD = 2


class AssetClass(enum.Enum):
    CORPORATE = "Corporate"
    SME = "SME"
    BANK = "Bank"
    SOVEREIGN = "Sovereign"
    RESIDENTIAL_MORTGAGE = "ResidentialMortgage"
    QUALIFIED_REVOLVING = "QualifiedRevolving"
    OTHER_RETAIL = "OtherRetail"

    @property
    def is_business(self) -> bool:
        """Business and government classes carry a maturity adjustment."""
        return self in BUSINESS_CLASSES

    @classmethod
    def parse(cls, text: str) -> "AssetClass":
        try:
            return cls(text)
        except ValueError:
            names = ", ".join(c.value for c in cls)
            raise ValueError(f"unknown asset class {text!r} (expected one of {names})") from None


BUSINESS_CLASSES = frozenset(
    {AssetClass.CORPORATE, AssetClass.SME, AssetClass.BANK, AssetClass.SOVEREIGN}
)


# ---------------------------------------------------------------------------
# quarter arithmetic

def is_quarter_end(d: dt.date) -> bool:
    return d.month in (3, 6, 9, 12) and d.day == calendar.monthrange(d.year, d.month)[1]


def quarter_end(year: int, month: int) -> dt.date:
    return dt.date(year, month, calendar.monthrange(year, month)[1])


def shift_quarter(d: dt.date, k: int) -> dt.date:
    """Move a quarter-end date by ``k`` whole quarters."""
    if not is_quarter_end(d):
        raise ValueError(f"{d.isoformat()} is not a calendar quarter end")
    index = d.year * 4 + (d.month // 3 - 1) + k
    year, q = divmod(index, 4)
    return quarter_end(year, 3 * (q + 1))


def quarter_index(d: dt.date) -> int:
    return d.year * 4 + (d.month // 3 - 1)


def parse_quarter(text: str) -> dt.date:
    d = dt.date.fromisoformat(text.strip())
    if not is_quarter_end(d):
        raise ValueError(f"{text!r} is not a calendar quarter end")
    return d


# ---------------------------------------------------------------------------
# records

@dataclass(frozen=True)
class ObligorGrade:
    """One pooled obligor grade treated as a single credit."""

    id: str
    asset_class: AssetClass
    ead: float
    lgd: float
    pd: float
    maturity_years: Optional[float] = None
    firm_size: Optional[float] = None
    rho_override: Optional[float] = None

    def violations(self) -> list[str]:
        out = []
        if not (math.isfinite(self.ead) and self.ead >= 0):
            out.append(f"grade {self.id}: ead must be >= 0, got {self.ead!r}")
        if not 0.0 <= self.lgd <= 1.0:
            out.append(f"grade {self.id}: lgd must lie in [0, 1], got {self.lgd!r}")
        if not 0.0 < self.pd < 1.0:
            out.append(f"grade {self.id}: pd must lie in (0, 1), got {self.pd!r}")
        if self.rho_override is not None and not 0.0 < self.rho_override < 1.0:
            out.append(f"grade {self.id}: rho_override must lie in (0, 1), got {self.rho_override!r}")
        business = self.asset_class.is_business
        if business and self.maturity_years is None:
            out.append(f"grade {self.id}: maturity_years required for {self.asset_class.value}")
        if not business and self.maturity_years is not None:
            out.append(f"grade {self.id}: maturity_years not applicable to {self.asset_class.value}")
        if self.maturity_years is not None and not self.maturity_years > 0:
            out.append(f"grade {self.id}: maturity_years must be > 0, got {self.maturity_years!r}")
        sme = self.asset_class is AssetClass.SME
        if sme and self.firm_size is None:
            out.append(f"grade {self.id}: firm_size required for SME")
        if not sme and self.firm_size is not None:
            out.append(f"grade {self.id}: firm_size only applies to SME")
        if self.firm_size is not None and not self.firm_size > 0:
            out.append(f"grade {self.id}: firm_size must be > 0, got {self.firm_size!r}")
        return out


@dataclass(frozen=True)
class PortfolioSnapshot:
    """All obligor grades reported at one quarter end, in reporting order."""

    as_of: dt.date
    grades: tuple[ObligorGrade, ...]

    def __post_init__(self):
        if not isinstance(self.grades, tuple):
            object.__setattr__(self, "grades", tuple(self.grades))

    def violations(self) -> list[str]:
        tag = self.as_of.isoformat()
        out = []
        if not is_quarter_end(self.as_of):
            out.append(f"snapshot {tag}: not a calendar quarter end")
        if not self.grades:
            out.append(f"snapshot {tag}: no grades")
        seen = set()
        for g in self.grades:
            if g.id in seen:
                out.append(f"snapshot {tag}: duplicate grade id {g.id}")
            seen.add(g.id)
            out.extend(f"snapshot {tag}: {v}" for v in g.violations())
        return out

    def check(self) -> "PortfolioSnapshot":
        problems = self.violations()
        if problems:
            raise ValidationError(problems)
        return self

    @property
    def total_ead(self) -> float:
        return math.fsum(g.ead for g in self.grades)


@dataclass(frozen=True)
class CapitalAccounts:
    """Per-quarter RWA split, provisions and capital base."""

    as_of: dt.date
    rwa_irb: float
    rwa_credit: float
    rwa_total: float
    provisions: float
    capital_base: float
    non_irb_expected_loss: float = 0.0

    def violations(self) -> list[str]:
        tag = self.as_of.isoformat()
        out = []
        if not 0.0 < self.rwa_irb <= self.rwa_credit <= self.rwa_total:
            out.append(
                f"accounts {tag}: need 0 < rwa_irb <= rwa_credit <= rwa_total, got "
                f"{self.rwa_irb!r}, {self.rwa_credit!r}, {self.rwa_total!r}"
            )
        if not self.provisions >= 0:
            out.append(f"accounts {tag}: provisions must be >= 0, got {self.provisions!r}")
        if not self.capital_base > 0:
            out.append(f"accounts {tag}: capital_base must be > 0, got {self.capital_base!r}")
        if not self.non_irb_expected_loss >= 0:
            out.append(f"accounts {tag}: non_irb_expected_loss must be >= 0")
        return out

    @property
    def capital_ratio(self) -> float:
        return self.capital_base / self.rwa_total


@dataclass(frozen=True)
class LossRecord:
    quarter: dt.date
    credit_loss: float

    def violations(self) -> list[str]:
        if not (math.isfinite(self.credit_loss) and self.credit_loss >= 0):
            return [f"losses {self.quarter.isoformat()}: credit_loss must be >= 0, got {self.credit_loss!r}"]
        return []


@dataclass(frozen=True)
class QuarterSeries:
    """Aligned quarterly snapshots, accounts and realized credit losses.

    The mappings are keyed by quarter-end date and must not be mutated after
    construction.
    """

    snapshots: dict = field(default_factory=dict)
    accounts: dict = field(default_factory=dict)
    losses: dict = field(default_factory=dict)

    @classmethod
    def build(cls, snapshots: Iterable[PortfolioSnapshot] = (),
              accounts: Iterable[CapitalAccounts] = (),
              losses: Iterable[LossRecord] = ()) -> "QuarterSeries":
        return cls(
            snapshots=dict(sorted((s.as_of, s) for s in snapshots)),
            accounts=dict(sorted((a.as_of, a) for a in accounts)),
            losses=dict(sorted((r.quarter, r) for r in losses)),
        )

    @property
    def quarters(self) -> list[dt.date]:
        return sorted(set(self.snapshots) | set(self.accounts) | set(self.losses))

    def snapshot(self, t: dt.date) -> PortfolioSnapshot:
        try:
            return self.snapshots[t]
        except KeyError:
            raise CoverageError(f"no snapshot for quarter {t.isoformat()}") from None

    def account(self, t: dt.date) -> CapitalAccounts:
        try:
            return self.accounts[t]
        except KeyError:
            raise CoverageError(f"no capital accounts for quarter {t.isoformat()}") from None

    def loss(self, t: dt.date) -> float:
        try:
            return self.losses[t].credit_loss
        except KeyError:
            raise CoverageError(f"no credit loss for quarter {t.isoformat()}") from None


# ---------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class Violation:
    kind: str  # "invariant" or "coverage"
    message: str

    def __str__(self):
        return f"[{self.kind}] {self.message}"


def window_quarters(t: dt.date, lag: int = 0) -> list[dt.date]:
    """Loss quarters s-1 .. s+2 with s = t + lag."""
    s = shift_quarter(t, lag)
    return [shift_quarter(s, k) for k in (-1, 0, 1, 2)]


def missing_inputs(series: QuarterSeries, t: dt.date, lag: int = 0,
                   input_lead: int = DEFAULT_INPUT_LEAD) -> list[str]:
    """Inputs a factor reading at ``t`` needs that the series does not carry."""
    missing = []
    base = shift_quarter(t, -input_lead)
    if base not in series.snapshots:
        missing.append(f"snapshot {base.isoformat()}")
    if base not in series.accounts:
        missing.append(f"accounts {base.isoformat()}")
    missing.extend(f"loss {q.isoformat()}" for q in window_quarters(t, lag) if q not in series.losses)
    return missing


def _contiguous(keys) -> list[dt.date]:
    """Quarters absent from the run spanned by ``keys``."""
    keys = sorted(keys)
    if not keys:
        return []
    present = {quarter_index(k) for k in keys}
    return [shift_quarter(keys[0], i) for i in range(quarter_index(keys[-1]) - quarter_index(keys[0]) + 1)
            if quarter_index(keys[0]) + i not in present]


def validate_series(series: QuarterSeries, lag: int = 0,
                    input_lead: int = DEFAULT_INPUT_LEAD) -> list[Violation]:
    """Check every record invariant plus the factor-reading coverage rule.

    A quarter t is expected to be computable when the series has a snapshot at
    ``t - input_lead`` and its loss records reach ``t + lag + 2``; any hole in
    between is reported as a coverage violation naming t. An empty list means
    the series is valid.
    """
    out: list[Violation] = []

    def inv(msg):
        out.append(Violation("invariant", msg))

    for q, snap in series.snapshots.items():
        if q != snap.as_of:
            inv(f"snapshot keyed {q.isoformat()} reports as_of {snap.as_of.isoformat()}")
        for v in snap.violations():
            inv(v)
    for q, acc in series.accounts.items():
        if q != acc.as_of:
            inv(f"accounts keyed {q.isoformat()} reports as_of {acc.as_of.isoformat()}")
        if not is_quarter_end(q):
            inv(f"accounts {q.isoformat()}: not a calendar quarter end")
        for v in acc.violations():
            inv(v)
    for q, rec in series.losses.items():
        if q != rec.quarter:
            inv(f"loss keyed {q.isoformat()} reports quarter {rec.quarter.isoformat()}")
        if not is_quarter_end(q):
            inv(f"losses {q.isoformat()}: not a calendar quarter end")
        for v in rec.violations():
            inv(v)
    for q in series.snapshots:
        if q not in series.accounts:
            inv(f"snapshot {q.isoformat()} has no matching accounts")

    quarter_keys = [q for q in series.quarters if is_quarter_end(q)]
    if len(quarter_keys) != len(series.quarters):
        return out
    for name, keys in (("snapshots", series.snapshots), ("accounts", series.accounts),
                       ("losses", series.losses)):
        for gap in _contiguous(keys):
            out.append(Violation("coverage", f"{name}: quarter {gap.isoformat()} missing from contiguous run"))

    if series.snapshots and series.losses:
        last_loss = max(series.losses)
        first = shift_quarter(min(series.snapshots), input_lead)
        last = shift_quarter(last_loss, -(lag + 2))
        t = first
        while t <= last:
            base = shift_quarter(t, -input_lead)
            if base <= max(series.snapshots):
                missing = missing_inputs(series, t, lag, input_lead)
                if missing:
                    out.append(Violation(
                        "coverage", f"quarter {t.isoformat()} uncomputable: missing {', '.join(missing)}"))
            t = shift_quarter(t, 1)
    return out


def invariant_violations(series: QuarterSeries) -> list[Violation]:
    return [v for v in validate_series(series) if v.kind == "invariant"]
