"""Supervisory asset correlation and maturity adjustment functions.

The constants are the Basel II IRB supervisory formulas (BCBS 2006,
paragraphs 272-273, 283, 328-330). The corporate 1.06 scaling factor is not
applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import ParameterError
from .portfolio import AssetClass, ObligorGrade

# (formula id, constants) per asset class; the single table behind the
# functions below and ``asrf params --dump``.
CONSTANTS = {
    AssetClass.CORPORATE: ("pd_weighted", {"rho_low": 0.12, "rho_high": 0.24, "decay": 50.0}),
    AssetClass.BANK: ("pd_weighted", {"rho_low": 0.12, "rho_high": 0.24, "decay": 50.0}),
    AssetClass.SOVEREIGN: ("pd_weighted", {"rho_low": 0.12, "rho_high": 0.24, "decay": 50.0}),
    AssetClass.SME: ("pd_weighted_size_adjusted", {
        "rho_low": 0.12, "rho_high": 0.24, "decay": 50.0,
        "size_slope": 0.04, "size_floor": 5.0, "size_cap": 50.0}),
    AssetClass.RESIDENTIAL_MORTGAGE: ("constant", {"rho": 0.15}),
    AssetClass.QUALIFIED_REVOLVING: ("constant", {"rho": 0.04}),
    AssetClass.OTHER_RETAIL: ("pd_weighted", {"rho_low": 0.03, "rho_high": 0.16, "decay": 35.0}),
}

MATURITY_CONSTANTS = {"slope_intercept": 0.11852, "slope_log_pd": 0.05478,
                      "m_floor": 1.0, "m_cap": 5.0, "m_pivot": 2.5}


@dataclass(frozen=True)
class SupervisoryParams:
    rho: float
    maturity_adjustment: float


def _check_pd(pd):
    if not 0.0 < pd < 1.0:
        raise ParameterError(f"pd must lie in (0, 1), got {pd!r}")


def _pd_weight(pd, decay):
    # expm1 keeps the weight accurate for tiny pd
    return math.expm1(-decay * pd) / math.expm1(-decay)


def asset_correlation(asset_class: AssetClass, pd: float, firm_size: Optional[float] = None) -> float:
    """Supervisory asset correlation for a grade.

    ``firm_size`` is annual turnover in millions and is required for SME
    exposures only; it is clamped to [5, 50].
    """
    _check_pd(pd)
    formula, c = CONSTANTS[asset_class]
    if asset_class is AssetClass.SME:
        if firm_size is None:
            raise ParameterError("SME asset correlation needs firm_size")
    elif firm_size is not None:
        raise ParameterError(f"firm_size does not apply to {asset_class.value}")
    if formula == "constant":
        return c["rho"]
    w = _pd_weight(pd, c["decay"])
    rho = c["rho_low"] * w + c["rho_high"] * (1.0 - w)
    if formula == "pd_weighted_size_adjusted":
        s = min(max(firm_size, c["size_floor"]), c["size_cap"])
        rho -= c["size_slope"] * (1.0 - (s - c["size_floor"]) / (c["size_cap"] - c["size_floor"]))
    return rho


def maturity_slope(pd: float) -> float:
    """b(PD) = (0.11852 - 0.05478 ln PD)^2."""
    _check_pd(pd)
    c = MATURITY_CONSTANTS
    return (c["slope_intercept"] - c["slope_log_pd"] * math.log(pd)) ** 2


def maturity_adjustment(asset_class: AssetClass, pd: float, maturity_years: Optional[float] = None) -> float:
    """Maturity adjustment (1 + (M - 2.5) b) / (1 - 1.5 b), M clamped to [1, 5].

    Retail classes return exactly 1 and reject an explicit maturity.
    """
    _check_pd(pd)
    if not asset_class.is_business:
        if maturity_years is not None:
            raise ParameterError(f"maturity does not apply to retail class {asset_class.value}")
        return 1.0
    if maturity_years is None:
        raise ParameterError(f"{asset_class.value} needs maturity_years")
    if not maturity_years > 0:
        raise ParameterError(f"maturity_years must be > 0, got {maturity_years!r}")
    c = MATURITY_CONSTANTS
    m = min(max(maturity_years, c["m_floor"]), c["m_cap"])
    b = maturity_slope(pd)
    return (1.0 + (m - c["m_pivot"]) * b) / (1.0 - 1.5 * b)


def grade_params(grade: ObligorGrade) -> SupervisoryParams:
    """Resolve rho (override wins) and nu for one grade."""
    if grade.rho_override is not None:
        rho = grade.rho_override
        if not 0.0 < rho < 1.0:
            raise ParameterError(f"grade {grade.id}: rho_override must lie in (0, 1)")
    else:
        try:
            rho = asset_correlation(grade.asset_class, grade.pd, grade.firm_size)
        except ParameterError as exc:
            raise ParameterError(f"grade {grade.id}: {exc}") from None
    try:
        nu = maturity_adjustment(grade.asset_class, grade.pd, grade.maturity_years)
    except ParameterError as exc:
        raise ParameterError(f"grade {grade.id}: {exc}") from None
    return SupervisoryParams(rho=rho, maturity_adjustment=nu)


def constants_rows():
    """Flattened constants table: (asset_class, formula_id, constant, value)."""
    rows = []
    for cls in AssetClass:
        formula, consts = CONSTANTS[cls]
        for name, value in consts.items():
            rows.append((cls.value, formula, name, value))
        if cls.is_business:
            for name, value in MATURITY_CONSTANTS.items():
                rows.append((cls.value, "maturity_adjustment", name, value))
    return rows
