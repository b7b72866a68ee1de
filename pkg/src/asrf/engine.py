"""Asymptotic single risk factor analytics: conditional PD, expected loss and capital.

Every portfolio function takes a :class:`PortfolioSnapshot` (or a prebuilt
:class:`Book`) and an explicit :class:`Mode`. ``RAW`` weights each grade by
EAD x LGD; ``REGULATORY`` also applies the maturity adjustment to both the
conditional and the expected loss sums.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .mathkernel import norm_cdf, norm_ppf
from .params import grade_params
from .portfolio import PortfolioSnapshot

IRB_CONFIDENCE = 0.999


class Mode(enum.Enum):
    RAW = "raw"
    REGULATORY = "regulatory"


@dataclass(frozen=True)
class LossDecomposition:
    expected_loss: float
    conditional_loss: float
    capital: float
    confidence: float
    factor_point: float


class Book:
    """Array view of a snapshot: per-grade weight, PD and asset correlation.

    ``weight`` is EAD x LGD (x maturity adjustment in regulatory mode).
    """

    __slots__ = ("mode", "weight", "pd", "rho", "nu", "_threshold", "_sqrt_rho", "_sqrt_1mrho")

    def __init__(self, weight, pd, rho, mode=Mode.RAW, nu=None):
        self.mode = mode
        self.weight = np.asarray(weight, dtype=float)
        self.pd = np.asarray(pd, dtype=float)
        self.rho = np.asarray(rho, dtype=float)
        self.nu = np.ones_like(self.pd) if nu is None else np.asarray(nu, dtype=float)
        if not (self.weight.shape == self.pd.shape == self.rho.shape) or self.pd.ndim != 1:
            raise ValueError("weight, pd and rho must be 1-d arrays of equal length")
        if self.pd.size == 0:
            raise ValidationError("portfolio has no grades")
        if not np.all((self.pd > 0) & (self.pd < 1)):
            raise DomainError("every pd must lie in (0, 1)")
        if not np.all((self.rho > 0) & (self.rho < 1)):
            raise DomainError("every rho must lie in (0, 1)")
        if not np.all(self.weight >= 0):
            raise ValidationError("grade weights must be non-negative")
        self._threshold = norm_ppf(self.pd)
        self._sqrt_rho = np.sqrt(self.rho)
        self._sqrt_1mrho = np.sqrt(1.0 - self.rho)

    @classmethod
    def from_snapshot(cls, snapshot: PortfolioSnapshot, mode: Mode = Mode.RAW) -> "Book":
        snapshot.check()
        params = [grade_params(g) for g in snapshot.grades]
        nu = np.array([p.maturity_adjustment for p in params])
        base = np.array([g.ead * g.lgd for g in snapshot.grades])
        weight = base * nu if mode is Mode.REGULATORY else base
        return cls(
            weight,
            [g.pd for g in snapshot.grades],
            [p.rho for p in params],
            mode=mode,
            nu=nu,
        )

    def __len__(self):
        return self.pd.size

    def conditional_pd(self, y: float) -> np.ndarray:
        return norm_cdf((self._threshold - self._sqrt_rho * y) / self._sqrt_1mrho)

    def conditional_loss(self, y: float) -> float:
        if not math.isfinite(y):
            raise DomainError(f"factor realisation must be finite, got {y!r}")
        return math.fsum(self.weight * self.conditional_pd(y))

    def expected_loss(self) -> float:
        return math.fsum(self.weight * self.pd)

    def max_loss(self) -> float:
        """Limit of conditional loss as y -> -inf."""
        return math.fsum(self.weight)

    def tail_loss(self, alpha: float) -> float:
        """Conditional loss at Y = Phi^{-1}(1 - alpha) via the +sqrt(rho) Phi^{-1}(alpha) form."""
        q = norm_ppf(alpha)
        return math.fsum(self.weight * norm_cdf((self._threshold + self._sqrt_rho * q) / self._sqrt_1mrho))

    def scaled(self, factor: float) -> "Book":
        return Book(self.weight * factor, self.pd, self.rho, self.mode, self.nu)


def as_book(portfolio, mode: Mode) -> Book:
    if isinstance(portfolio, Book):
        if portfolio.mode is not mode:
            raise ValueError(f"book built in {portfolio.mode.value} mode, {mode.value} requested")
        return portfolio
    return Book.from_snapshot(portfolio, mode)


def conditional_pd(pd: float, rho: float, y: float) -> float:
    """Probability of default conditional on the systematic factor taking value ``y``.

    p(y) = Phi((Phi^{-1}(pd) - sqrt(rho) y) / sqrt(1 - rho)), strictly
    decreasing in y.
    """
    if not 0.0 < pd < 1.0:
        raise DomainError(f"pd must lie in (0, 1), got {pd!r}")
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (0, 1), got {rho!r}")
    if not math.isfinite(y):
        raise DomainError(f"y must be finite, got {y!r}")
    return norm_cdf((norm_ppf(pd) - math.sqrt(rho) * y) / math.sqrt(1.0 - rho))


def conditional_expected_loss(portfolio, y: float, mode: Mode = Mode.RAW) -> float:
    """Portfolio loss expected given Y = y: sum of weight_i p_i(y)."""
    return as_book(portfolio, mode).conditional_loss(y)


def expected_loss(portfolio, mode: Mode = Mode.RAW) -> float:
    return as_book(portfolio, mode).expected_loss()


def capital(portfolio, alpha: float, mode: Mode = Mode.RAW) -> LossDecomposition:
    """Capital against unexpected loss at confidence ``alpha``.

    The conditional loss at the tail point Phi^{-1}(1 - alpha) minus the
    expected loss.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    book = as_book(portfolio, mode)
    tail = book.tail_loss(alpha)
    el = book.expected_loss()
    return LossDecomposition(
        expected_loss=el,
        conditional_loss=tail,
        capital=tail - el,
        confidence=alpha,
        factor_point=norm_ppf(1.0 - alpha),
    )


def regulatory_capital(portfolio) -> LossDecomposition:
    """IRB capital: 99.9% confidence with maturity-adjusted weights on both sums."""
    return capital(portfolio, IRB_CONFIDENCE, Mode.REGULATORY)
