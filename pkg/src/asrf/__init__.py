"""Asymptotic single risk factor (IRB) credit capital engine."""

__version__ = "0.1.0"

from .adequacy import (SolvencyReading, StressReading, adequacy_report, allocate_capital,
                       allocate_provisions, distance_to_default, reverse_stress)
from .engine import (Book, LossDecomposition, Mode, capital, conditional_expected_loss, conditional_pd,
                     expected_loss, regulatory_capital)
from .errors import (AsrfError, BracketError, ConvergenceError, CoverageError, DomainError,
                     InfeasibleError, ParameterError, ParseError, ValidationError)
from .factor import Allocation, FactorReading, FactorSeries, allocate_losses, factor_series, recover_factor
from .mathkernel import find_root_monotone, norm_cdf, norm_ppf
from .montecarlo import LossDistribution, SimConfig, convergence_study, empirical_var, simulate
from .params import asset_correlation, grade_params, maturity_adjustment
from .portfolio import (AssetClass, CapitalAccounts, LossRecord, ObligorGrade, PortfolioSnapshot,
                        QuarterSeries, validate_series)

std_normal_cdf = norm_cdf
std_normal_quantile = norm_ppf
