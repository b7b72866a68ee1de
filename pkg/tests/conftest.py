import datetime as dt

import numpy as np
import pytest

from asrf.portfolio import (AssetClass, CapitalAccounts, LossRecord, ObligorGrade, PortfolioSnapshot,
                            QuarterSeries, shift_quarter)

Q0 = dt.date(2008, 3, 31)


def quarters(n, start=Q0):
    return [shift_quarter(start, k) for k in range(n)]


def single_grade(ead=100.0, lgd=0.45, pd=0.01, rho=0.2, as_of=Q0, asset_class=AssetClass.OTHER_RETAIL):
    g = ObligorGrade("g1", asset_class, ead, lgd, pd, rho_override=rho)
    return PortfolioSnapshot(as_of, (g,))


def random_book(rng, n=25, as_of=Q0, overrides=False):
    """Heterogeneous book mixing every asset class."""
    classes = list(AssetClass)
    grades = []
    for i in range(n):
        cls = classes[i % len(classes)]
        grades.append(ObligorGrade(
            id=f"g{i}",
            asset_class=cls,
            ead=float(rng.lognormal(3.0, 1.0)),
            lgd=float(rng.uniform(0.1, 0.9)),
            pd=float(np.exp(rng.uniform(np.log(3e-4), np.log(0.3)))),
            maturity_years=float(rng.uniform(0.5, 7.0)) if cls.is_business else None,
            firm_size=float(rng.uniform(1.0, 60.0)) if cls is AssetClass.SME else None,
            rho_override=float(rng.uniform(0.02, 0.4)) if overrides else None,
        ))
    return PortfolioSnapshot(as_of, tuple(grades))


def flat_series(n=6, loss=1.0, snapshot=None):
    """Series with identical snapshots and accounts each quarter and constant losses."""
    qs = quarters(n)
    snaps, accs = [], []
    for q in qs:
        base = snapshot or single_grade()
        snaps.append(PortfolioSnapshot(q, base.grades))
        accs.append(CapitalAccounts(q, rwa_irb=70.0, rwa_credit=100.0, rwa_total=120.0,
                                    provisions=1.0, capital_base=12.0, non_irb_expected_loss=0.2))
    return QuarterSeries.build(snaps, accs, [LossRecord(q, loss) for q in qs])


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


def single_reading_series(snapshot, y, ratio=0.7, rwa_credit=1000.0):
    """Five quarters; the only computable reading (third quarter) sees window losses at ``y``.

    Every quarter carries ``snapshot``'s grades.
    """
    from asrf.engine import Mode, conditional_expected_loss

    qs = quarters(5)
    target = conditional_expected_loss(snapshot, y, Mode.REGULATORY)
    per_quarter = target / ratio / 4.0
    snaps = [PortfolioSnapshot(q, snapshot.grades) for q in qs]
    accs = [CapitalAccounts(q, rwa_irb=ratio * rwa_credit, rwa_credit=rwa_credit, rwa_total=1.25 * rwa_credit,
                            provisions=1.0, capital_base=0.1 * rwa_credit, non_irb_expected_loss=0.5)
            for q in qs]
    return QuarterSeries.build(snaps, accs, [LossRecord(q, per_quarter) for q in qs]), qs[2]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
