"""Augmented Dickey-Fuller unit-root screening with BIC lag selection.

Critical values come from response-surface regressions (MacKinnon, 2010,
single-variable case) evaluated at the realized regression sample size,
rather than from small hard-coded tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

__all__ = ["AdfResult", "adf_test", "select_lag_bic", "critical_values", "default_max_lag"]

DETERMINISTICS = ("none", "constant", "constant_trend")

# Response-surface coefficients (beta_inf, b1, b2, b3); the critical value at
# regression sample size N is beta_inf + b1/N + b2/N^2 + b3/N^3.
_CRIT_SURFACE = {
    "none": {
        0.01: (-2.56574, -2.2358, -3.627, 0.0),
        0.05: (-1.94100, -0.2686, -3.365, 31.223),
        0.10: (-1.61682, 0.2656, 2.714, 25.364),
    },
    "constant": {
        0.01: (-3.43035, -6.5393, -16.786, -79.433),
        0.05: (-2.86154, -2.8903, -4.234, -40.040),
        0.10: (-2.56677, -1.5384, -2.809, 0.0),
    },
    "constant_trend": {
        0.01: (-3.95877, -9.0531, -28.428, -134.155),
        0.05: (-3.41049, -4.3904, -9.036, -45.374),
        0.10: (-3.12705, -2.5856, -3.925, -22.380),
    },
}


@dataclass(frozen=True)
class AdfResult:
    """Unit-root test outcome for one series.

    ``statistic`` is the t-ratio on the lagged level; ``p_value_band`` is one
    of ``"<0.01"``, ``"<0.05"``, ``"<0.10"``, ``">=0.10"``. ``nobs`` is the
    sample size of the final regression, which the critical values refer to.
    """

    statistic: float
    chosen_lag: int
    deterministic: str
    p_value_band: str
    reject_at_1pct: bool
    nobs: int
    crit_1pct: float
    crit_5pct: float
    crit_10pct: float

    @property
    def reject_at_5pct(self) -> bool:
        return self.statistic < self.crit_5pct

    @property
    def reject_at_10pct(self) -> bool:
        return self.statistic < self.crit_10pct


def default_max_lag(nobs: int) -> int:
    """Schwert's rule of thumb, floor(12 * (T/100)^0.25)."""
    return int(math.floor(12.0 * (nobs / 100.0) ** 0.25))


def critical_values(deterministic: str, nobs: int) -> dict[float, float]:
    """Left-tail critical values at the 1, 5, and 10 percent levels."""
    if deterministic not in DETERMINISTICS:
        raise ValueError(f"deterministic must be one of {DETERMINISTICS}")
    if nobs < 1:
        raise ValueError("nobs must be positive")
    out = {}
    for level, (b_inf, b1, b2, b3) in _CRIT_SURFACE[deterministic].items():
        out[level] = b_inf + b1 / nobs + b2 / nobs**2 + b3 / nobs**3
    return out


def _ndet(deterministic: str) -> int:
    return {"none": 0, "constant": 1, "constant_trend": 2}[deterministic]


def _design(y: np.ndarray, lag: int, trim: int, deterministic: str):
    """Level-regression target and regressors with rows trimmed to ``trim``.

    Columns are ordered [deterministic terms, lagged level, lagged diffs],
    so nested lag candidates are column prefixes of the widest design.
    """
    dy = np.diff(y)
    target = dy[trim:]
    nobs = target.shape[0]
    cols = []
    if deterministic in ("constant", "constant_trend"):
        cols.append(np.ones(nobs))
    if deterministic == "constant_trend":
        cols.append(np.arange(1.0, nobs + 1.0))
    cols.append(y[trim:-1])
    for k in range(1, lag + 1):
        cols.append(dy[trim - k : dy.shape[0] - k])
    return np.column_stack(cols), target


def _check_full_rank(r_factor: np.ndarray) -> None:
    diag = np.abs(np.diag(r_factor))
    if diag.size == 0 or diag.min() <= diag.max() * 1e-12:
        raise ValueError("singular regressor matrix (constant series?)")


def _validate(series, max_lag, deterministic) -> tuple[np.ndarray, int]:
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if not np.all(np.isfinite(y)):
        raise ValueError("series contains non-finite values")
    if deterministic not in DETERMINISTICS:
        raise ValueError(f"deterministic must be one of {DETERMINISTICS}")
    if max_lag is None:
        max_lag = default_max_lag(y.shape[0])
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    nobs = y.shape[0] - 1 - max_lag
    ncols = _ndet(deterministic) + 1 + max_lag
    if y.shape[0] <= max_lag + 10 or nobs - ncols < 2:
        raise ValueError(
            f"series too short: {y.shape[0]} observations for max_lag={max_lag}"
        )
    return y, int(max_lag)


def select_lag_bic(series, max_lag: int | None = None, deterministic: str = "constant") -> int:
    """Lag order minimizing the BIC of the unit-root regression.

    Parameters
    ----------
    series : array_like, 1d
        Series in levels.
    max_lag : int, optional
        Largest lag considered; defaults to Schwert's rule.
    deterministic : str
        ``"none"``, ``"constant"``, or ``"constant_trend"``.

    Every candidate is fitted on the common sample trimmed at ``max_lag`` so
    the criteria are comparable; ties resolve to the smallest lag.
    """
    y, max_lag = _validate(series, max_lag, deterministic)
    if max_lag == 0:
        return 0
    design, target = _design(y, max_lag, max_lag, deterministic)
    q, r = np.linalg.qr(design)
    _check_full_rank(r)
    qty = q.T @ target
    total = float(target @ target)
    explained = np.cumsum(qty**2)
    nobs = target.shape[0]
    ndet = _ndet(deterministic)
    best_lag, best_bic = 0, np.inf
    for lag in range(max_lag + 1):
        k = ndet + 1 + lag
        ssr = max(total - float(explained[k - 1]), 1e-300)
        bic = nobs * math.log(ssr / nobs) + k * math.log(nobs)
        if bic < best_bic:
            best_lag, best_bic = lag, bic
    return best_lag


def adf_test(series, max_lag: int | None = None, deterministic: str = "constant") -> AdfResult:
    """Augmented Dickey-Fuller test with data-driven lag length.

    Parameters
    ----------
    series : array_like, 1d
        Series in levels.
    max_lag : int, optional
        Largest lag fed to the BIC search; defaults to Schwert's rule.
    deterministic : str
        Deterministic terms included in the regression.

    Returns
    -------
    AdfResult
        The statistic is the t-ratio on the lagged level; a value below the
        relevant critical value rejects the unit-root null. The final
        regression uses the full sample available at the chosen lag.
    """
    y, max_lag = _validate(series, max_lag, deterministic)
    chosen = select_lag_bic(y, max_lag, deterministic)
    design, target = _design(y, chosen, chosen, deterministic)
    q, r = np.linalg.qr(design)
    _check_full_rank(r)
    qty = q.T @ target
    coef = solve_triangular(r, qty, lower=False)
    resid = target - design @ coef
    nobs, ncols = design.shape
    dof = nobs - ncols
    if dof <= 0:
        raise ValueError("not enough observations for the chosen lag")
    s2 = float(resid @ resid) / dof
    if s2 <= 0.0:
        raise ValueError("degenerate regression: zero residual variance (constant series?)")
    pos = _ndet(deterministic)
    unit = np.zeros(ncols)
    unit[pos] = 1.0
    # (X'X)^{-1}_{pos,pos} = || R^{-T} e_pos ||^2
    w = solve_triangular(r.T, unit, lower=True)
    stat = float(coef[pos]) / math.sqrt(s2 * float(w @ w))
    crit = critical_values(deterministic, nobs)
    if stat < crit[0.01]:
        band = "<0.01"
    elif stat < crit[0.05]:
        band = "<0.05"
    elif stat < crit[0.10]:
        band = "<0.10"
    else:
        band = ">=0.10"
    return AdfResult(
        statistic=stat,
        chosen_lag=chosen,
        deterministic=deterministic,
        p_value_band=band,
        reject_at_1pct=stat < crit[0.01],
        nobs=nobs,
        crit_1pct=crit[0.01],
        crit_5pct=crit[0.05],
        crit_10pct=crit[0.10],
    )
