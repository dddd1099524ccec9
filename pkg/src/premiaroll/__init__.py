"""Rolling-window two-pass factor-model estimation and generalized pricing tests."""

from .factors import (
    FactorSpec,
    UiState,
    build_excess_market,
    build_factors,
    build_spread,
    build_ui,
    build_vix_factor,
)
from .fmb import (
    FirstPassFit,
    RiskPremiumEstimate,
    expected_premiums,
    first_pass,
    fit_first_pass,
    second_pass,
)
from .grs import GrsResult, f_quantile, f_upper_tail, grs_statistic
from .panel import (
    AlignedPanel,
    AlignmentAction,
    CalendarPolicy,
    CsvSchema,
    RawSeries,
    align,
    align_calendars,
    excess,
    load_csv,
    to_returns,
)
from .rolling import (
    RollingSeries,
    WindowPlan,
    WindowResult,
    plan_windows,
    premium_correlation,
    roll,
)
from .simkit import DgpSpec, McResult, mc_experiment, random_spec, simulate, trading_dates
from .stationarity import AdfResult, adf_test, critical_values, default_max_lag, select_lag_bic

__version__ = "0.1.0"

__all__ = [
    "AdfResult",
    "AlignedPanel",
    "AlignmentAction",
    "CalendarPolicy",
    "CsvSchema",
    "DgpSpec",
    "FactorSpec",
    "FirstPassFit",
    "GrsResult",
    "McResult",
    "RawSeries",
    "RiskPremiumEstimate",
    "RollingSeries",
    "UiState",
    "WindowPlan",
    "WindowResult",
    "adf_test",
    "align",
    "align_calendars",
    "build_excess_market",
    "build_factors",
    "build_spread",
    "build_ui",
    "build_vix_factor",
    "critical_values",
    "default_max_lag",
    "excess",
    "expected_premiums",
    "f_quantile",
    "f_upper_tail",
    "first_pass",
    "fit_first_pass",
    "grs_statistic",
    "load_csv",
    "mc_experiment",
    "plan_windows",
    "premium_correlation",
    "random_spec",
    "roll",
    "second_pass",
    "select_lag_bic",
    "simulate",
    "to_returns",
    "trading_dates",
]
