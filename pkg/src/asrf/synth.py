"""Synthetic quarter series shaped like IRB capital adequacy returns.

Each asset class gets ``grades_per_class`` grades spread over the PD bands,
with exposure-weighted parameters (weights are EAD). Accounts are built so
that IRB RWA is 12.5 x regulatory capital, and losses are generated so that
the allocated four-quarter loss window at every computable quarter equals the
regulatory conditional loss of the t-2 book at the requested factor value.
In noisy mode that conditional loss is replaced by a binomial draw of
defaults among ``obligors_per_grade`` clones of each grade.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .engine import Book, Mode, regulatory_capital
from .portfolio import (DEFAULT_INPUT_LEAD, AssetClass, CapitalAccounts, LossRecord, ObligorGrade,
                        PortfolioSnapshot, QuarterSeries, shift_quarter)

DEFAULT_PD_BANDS = (0.0003, 0.001, 0.0025, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2)

# share of total EAD and typical exposure-weighted LGD per class
CLASS_PROFILE = {
    AssetClass.RESIDENTIAL_MORTGAGE: (0.55, 0.20),
    AssetClass.CORPORATE: (0.17, 0.40),
    AssetClass.SME: (0.10, 0.35),
    AssetClass.BANK: (0.06, 0.45),
    AssetClass.SOVEREIGN: (0.05, 0.45),
    AssetClass.OTHER_RETAIL: (0.05, 0.50),
    AssetClass.QUALIFIED_REVOLVING: (0.02, 0.80),
}
# EAD decays by this factor per PD band so books concentrate in good grades
BAND_DECAY = 0.55


@dataclass(frozen=True)
class SynthSpec:
    quarters: int
    base_y_path: Sequence[float]
    grades_per_class: int = 6
    pd_band_edges: Sequence[float] = DEFAULT_PD_BANDS
    seed: int = 0
    ead_scale: float = 1_000_000.0
    start: dt.date = dt.date(2008, 3, 31)
    noisy: bool = False
    obligors_per_grade: int = 10_000
    capital_ratio: float = 0.11
    provision_cover: float = 1.2
    irb_rwa_share: float = 0.8
    credit_rwa_share: float = 0.88
    non_irb_el_ratio: float = 0.25
    growth: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "base_y_path", tuple(float(y) for y in self.base_y_path))
        object.__setattr__(self, "pd_band_edges", tuple(float(p) for p in self.pd_band_edges))
        if self.quarters < 1 or self.grades_per_class < 1:
            raise ValueError("quarters and grades_per_class must be positive")
        if len(self.base_y_path) != self.quarters:
            raise ValueError(f"base_y_path has {len(self.base_y_path)} entries, need {self.quarters}")
        e = self.pd_band_edges
        if len(e) < 2 or not all(0 < a < b < 1 for a, b in zip(e, e[1:])):
            raise ValueError("pd_band_edges must be strictly ascending inside (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not self.ead_scale > 0:
            raise ValueError("ead_scale must be positive")


def _band_of(j, grades, bands):
    if grades == 1:
        return 0
    return round(j * (bands - 1) / (grades - 1))


def _snapshots(spec: SynthSpec, rng: np.random.Generator) -> list[PortfolioSnapshot]:
    edges = spec.pd_band_edges
    nbands = len(edges) - 1
    templates = []
    for cls, (share, lgd) in CLASS_PROFILE.items():
        bands = [_band_of(j, spec.grades_per_class, nbands) for j in range(spec.grades_per_class)]
        raw = np.array([BAND_DECAY ** b for b in bands]) * rng.lognormal(0.0, 0.3, len(bands))
        eads = spec.ead_scale * share * raw / raw.sum()
        for j, b in enumerate(bands):
            templates.append(dict(
                id=f"{cls.value}-{j + 1:02d}",
                asset_class=cls,
                ead=float(eads[j]),
                lgd=float(np.clip(lgd + rng.normal(0.0, 0.03), 0.05, 0.95)),
                pd=math.sqrt(edges[b] * edges[b + 1]),
                maturity_years=float(rng.uniform(1.0, 5.0)) if cls.is_business else None,
                firm_size=float(rng.uniform(5.0, 50.0)) if cls is AssetClass.SME else None,
            ))
    out = []
    for k in range(spec.quarters):
        q = shift_quarter(spec.start, k)
        drift = rng.normal(0.0, 0.02, (len(templates), 2))
        grades = []
        for tpl, (de, dp) in zip(templates, drift):
            g = dict(tpl)
            g["ead"] = tpl["ead"] * (1.0 + spec.growth) ** k * math.exp(de)
            g["pd"] = min(tpl["pd"] * math.exp(dp), 0.5)
            grades.append(ObligorGrade(**g))
        out.append(PortfolioSnapshot(q, tuple(grades)))
    return out


def _accounts(spec: SynthSpec, snap: PortfolioSnapshot) -> CapitalAccounts:
    reg = regulatory_capital(snap)
    rwa_irb = 12.5 * reg.capital
    rwa_credit = rwa_irb / spec.irb_rwa_share
    rwa_total = rwa_credit / spec.credit_rwa_share
    non_irb_el = spec.non_irb_el_ratio * reg.expected_loss
    return CapitalAccounts(
        as_of=snap.as_of,
        rwa_irb=rwa_irb,
        rwa_credit=rwa_credit,
        rwa_total=rwa_total,
        provisions=spec.provision_cover * (reg.expected_loss + non_irb_el),
        capital_base=spec.capital_ratio * rwa_total,
        non_irb_expected_loss=non_irb_el,
    )


def _noisy_loss(book: Book, y: float, clones: int, rng: np.random.Generator) -> float:
    defaults = rng.binomial(clones, book.conditional_pd(y))
    return math.fsum(book.weight * defaults / clones)


def spread_windows(windows: dict, n: int, baseline: float) -> list[float]:
    """Non-negative quarterly losses L[0..n-1] whose windows L[t-1..t+2] sum to ``windows[t]``.

    Window sums pin every first difference L[k+4] - L[k]; the four free
    starting levels are set as low as non-negativity allows, and the slack
    left in the first window is shared equally among them. ``L[0]`` is not
    constrained and takes ``baseline``.

    Raises ValueError when no non-negative solution exists.
    """
    if not windows:
        return [baseline] * n
    ts = sorted(windows)
    first, last = ts[0], ts[-1]
    if ts != list(range(first, last + 1)) or first != 2 or last + 2 >= n:
        raise ValueError("windows must cover a contiguous interior run starting at index 2")
    offset = [0.0] * n
    for k in range(1, last - 1):
        offset[k + 4] = offset[k] + windows[k + 2] - windows[k + 1]
    floor = [0.0] * 4
    for k in range(1, last + 3):
        r = (k - 1) % 4
        floor[r] = max(floor[r], -offset[k])
    slack = windows[first] - sum(floor)
    if slack < 0:
        raise ValueError("factor path too volatile: no non-negative quarterly losses reproduce the windows")
    level = [f + slack / 4.0 for f in floor]
    losses = [baseline] * n
    for k in range(1, last + 3):
        losses[k] = max(level[(k - 1) % 4] + offset[k], 0.0)
    return losses


def synthesize(spec: SynthSpec) -> QuarterSeries:
    """Build a series whose recovered factor path reproduces ``spec.base_y_path``."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(spec.seed)))
    snaps = _snapshots(spec, rng)
    accounts = [_accounts(spec, s) for s in snaps]
    lead = DEFAULT_INPUT_LEAD
    windows = {}
    for t in range(lead, spec.quarters - 2):
        snap, acc = snaps[t - lead], accounts[t - lead]
        book = Book.from_snapshot(snap, Mode.REGULATORY)
        y = spec.base_y_path[t]
        irb_loss = (_noisy_loss(book, y, spec.obligors_per_grade, rng) if spec.noisy
                    else book.conditional_loss(y))
        windows[t] = irb_loss / (acc.rwa_irb / acc.rwa_credit)
    baseline = accounts[0].provisions / (4.0 * spec.provision_cover)
    losses = spread_windows(windows, spec.quarters, baseline)
    return QuarterSeries.build(
        snaps, accounts,
        [LossRecord(shift_quarter(spec.start, k), v) for k, v in enumerate(losses)],
    )


def realistic_book(seed: int = 0, ead_scale: float = 1_000_000.0) -> PortfolioSnapshot:
    """The reference synthetic book: default class mix, bands and LGDs, first quarter."""
    spec = SynthSpec(quarters=1, base_y_path=[0.0], seed=seed, ead_scale=ead_scale)
    return synthesize(spec).snapshots[spec.start]
