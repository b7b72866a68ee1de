import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asrf.engine import (Book, Mode, capital, conditional_expected_loss, conditional_pd, expected_loss,
                         regulatory_capital)
from asrf.errors import DomainError, ValidationError
from asrf.mathkernel import norm_cdf, norm_ppf
from asrf.portfolio import AssetClass, ObligorGrade, PortfolioSnapshot
from asrf.synth import realistic_book

from conftest import Q0, random_book, single_grade

# 50-digit mpmath evaluations of the conditional PD formula
CPD_TAIL = 0.14549872935917850   # pd=0.01, rho=0.2, y=-3.090
CPD_MEDIAN = 0.0046484899209106633  # pd=0.01, rho=0.2, y=0
CAPITAL_999 = 6.0986369758982095  # 100 x 0.45 single grade, alpha=0.999


def test_conditional_pd_examples():
    assert conditional_pd(0.03, 1e-14, 2.7) == pytest.approx(0.03, rel=1e-6)
    assert conditional_pd(0.01, 0.2, -3.090) == pytest.approx(CPD_TAIL, rel=1e-13)
    assert conditional_pd(0.01, 0.2, 0.0) == pytest.approx(CPD_MEDIAN, rel=1e-13)


def test_conditional_pd_against_mc_frequency():
    rng = np.random.default_rng(7)
    eps = rng.standard_normal(10_000_000)
    freq = np.mean(math.sqrt(0.8) * eps < norm_ppf(0.01))
    se = math.sqrt(CPD_MEDIAN * (1 - CPD_MEDIAN) / eps.size)
    assert abs(freq - conditional_pd(0.01, 0.2, 0.0)) < 3 * se


@pytest.mark.parametrize("args", [(0.0, 0.2, 0.0), (1.0, 0.2, 0.0), (0.1, 0.0, 0.0), (0.1, 1.0, 0.0),
                                  (0.1, 0.2, math.inf)])
def test_conditional_pd_domain(args):
    with pytest.raises(DomainError):
        conditional_pd(*args)


@settings(max_examples=300)
@given(st.floats(1e-6, 0.9), st.floats(1e-3, 0.99), st.floats(-8, 8), st.floats(1e-3, 2))
def test_conditional_pd_decreasing(pd, rho, y, dy):
    lo, hi = conditional_pd(pd, rho, y + dy), conditional_pd(pd, rho, y)
    assert 0.0 <= lo <= hi <= 1.0
    if 1e-300 < hi < 1 - 1e-15:
        assert lo < hi


def test_conditional_loss_single_grade():
    snap = single_grade()
    assert conditional_expected_loss(snap, -3.090) == pytest.approx(100 * 0.45 * CPD_TAIL, rel=1e-13)
    assert round(conditional_expected_loss(snap, -3.090), 2) == 6.55


def test_zero_ead_contributes_nothing():
    a = single_grade()
    extra = ObligorGrade("z", AssetClass.OTHER_RETAIL, 0.0, 0.9, 0.2, rho_override=0.3)
    b = PortfolioSnapshot(Q0, a.grades + (extra,))
    assert conditional_expected_loss(b, -1.0) == conditional_expected_loss(a, -1.0)


def test_conditional_loss_limits(rng):
    snap = random_book(rng)
    book = Book.from_snapshot(snap, Mode.REGULATORY)
    assert book.conditional_loss(200.0) < 1e-12 * book.max_loss()
    assert book.conditional_loss(-200.0) == pytest.approx(book.max_loss(), rel=1e-12)
    total = math.fsum(g.ead * g.lgd * nu for g, nu in zip(snap.grades, book.nu))
    assert book.max_loss() == pytest.approx(total, rel=1e-14)


def test_expected_loss_examples():
    assert expected_loss(single_grade()) == pytest.approx(0.45, rel=1e-15)
    snap = single_grade(ead=300.0)
    assert expected_loss(snap) == pytest.approx(3 * expected_loss(single_grade()), rel=1e-15)


def test_expected_loss_is_factor_average(rng):
    # Gauss-Hermite quadrature of the conditional loss over Y ~ N(0, 1)
    x, w = np.polynomial.hermite_e.hermegauss(200)
    w = w / w.sum()
    for _ in range(4):
        snap = random_book(rng)
        for mode in Mode:
            book = Book.from_snapshot(snap, mode)
            quad = sum(wi * book.conditional_loss(xi) for xi, wi in zip(x, w))
            assert quad == pytest.approx(expected_loss(snap, mode), rel=1e-9)


def test_regulatory_expected_loss_uses_nu(rng):
    snap = random_book(rng)
    book = Book.from_snapshot(snap, Mode.REGULATORY)
    manual = math.fsum(g.ead * g.lgd * nu * g.pd for g, nu in zip(snap.grades, book.nu))
    assert expected_loss(snap, Mode.REGULATORY) == pytest.approx(manual, rel=1e-14)


def test_capital_examples():
    dec = capital(single_grade(), 0.999)
    assert dec.capital == pytest.approx(CAPITAL_999, rel=1e-12)
    assert dec.capital == pytest.approx(dec.conditional_loss - dec.expected_loss, rel=1e-15)
    assert dec.factor_point == pytest.approx(-3.0902323061678133, rel=1e-14)


def test_capital_at_median(rng):
    snap = random_book(rng, overrides=True)
    dec = capital(snap, 0.5)
    manual = math.fsum(g.ead * g.lgd * norm_cdf(norm_ppf(g.pd) / math.sqrt(1 - g.rho_override))
                       for g in snap.grades)
    assert dec.factor_point == 0.0
    assert dec.capital == pytest.approx(manual - expected_loss(snap), rel=1e-12)


def test_capital_symmetric_form_matches_tail_point(rng):
    snap = random_book(rng)
    for alpha in (0.01, 0.3, 0.5, 0.9, 0.999, 0.999999):
        dec = capital(snap, alpha)
        direct = conditional_expected_loss(snap, norm_ppf(1 - alpha))
        assert dec.conditional_loss == pytest.approx(direct, rel=1e-12)


def test_capital_increasing_in_alpha(rng):
    snap = random_book(rng)
    alphas = np.linspace(0.01, 0.9999, 300)
    caps = [capital(snap, a).capital for a in alphas]
    assert np.all(np.diff(caps) > 0)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.5, 2.0])
def test_capital_domain(alpha):
    with pytest.raises(DomainError):
        capital(single_grade(), alpha)


def test_regulatory_capital_factor_point(rng):
    dec = regulatory_capital(random_book(rng))
    assert round(dec.factor_point, 3) == -3.090
    assert dec.confidence == 0.999


def test_retail_only_regulatory_equals_raw(rng):
    retail = [AssetClass.RESIDENTIAL_MORTGAGE, AssetClass.QUALIFIED_REVOLVING, AssetClass.OTHER_RETAIL]
    grades = tuple(ObligorGrade(f"r{i}", retail[i % 3], float(rng.uniform(1, 100)), float(rng.uniform(.1, .9)),
                                float(rng.uniform(.001, .2))) for i in range(12))
    snap = PortfolioSnapshot(Q0, grades)
    assert regulatory_capital(snap) == capital(snap, 0.999, Mode.RAW)


def test_realistic_book_sanity_band():
    snap = realistic_book()
    reg = regulatory_capital(snap)
    share = (reg.expected_loss + reg.capital) / snap.total_ead
    assert 0.01 <= share <= 0.05


def test_positive_homogeneity(rng):
    snap = random_book(rng)
    c = 3.7
    scaled = PortfolioSnapshot(snap.as_of, tuple(
        ObligorGrade(g.id, g.asset_class, g.ead * c, g.lgd, g.pd, g.maturity_years, g.firm_size, g.rho_override)
        for g in snap.grades))
    for mode in Mode:
        assert expected_loss(scaled, mode) == pytest.approx(c * expected_loss(snap, mode), rel=1e-13)
        assert conditional_expected_loss(scaled, -1.3, mode) == pytest.approx(
            c * conditional_expected_loss(snap, -1.3, mode), rel=1e-13)
        assert capital(scaled, 0.99, mode).capital == pytest.approx(c * capital(snap, 0.99, mode).capital, rel=1e-13)


def test_permutation_invariance_large_book():
    rng = np.random.default_rng(11)
    n = 100_000
    weight = rng.lognormal(0, 2, n)
    pd = np.exp(rng.uniform(np.log(1e-4), np.log(0.3), n))
    rho = rng.uniform(0.03, 0.3, n)
    book = Book(weight, pd, rho)
    perm = rng.permutation(n)
    other = Book(weight[perm], pd[perm], rho[perm])
    for y in (-3.0, 0.0, 2.5):
        assert other.conditional_loss(y) == pytest.approx(book.conditional_loss(y), rel=1e-9)
    assert other.expected_loss() == pytest.approx(book.expected_loss(), rel=1e-9)


def test_invalid_snapshot_rejected():
    bad = PortfolioSnapshot(Q0, (ObligorGrade("b", AssetClass.OTHER_RETAIL, 1.0, 0.5, 0.0),))
    with pytest.raises(ValidationError):
        expected_loss(bad)


def test_book_mode_mismatch(rng):
    book = Book.from_snapshot(random_book(rng), Mode.RAW)
    with pytest.raises(ValueError):
        expected_loss(book, Mode.REGULATORY)
