"""Joint pricing test that all first-pass intercepts are zero, with F machinery."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import brentq
from scipy.special import betainc

from ._linalg import quad_form_inv, spd_cholesky
from .fmb import FirstPassFit

__all__ = ["GrsResult", "grs_statistic", "f_upper_tail", "f_quantile"]


def _check_df(df1: float, df2: float) -> None:
    if df1 < 1 or df2 < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got ({df1}, {df2})")


def f_upper_tail(x: float, df1: float, df2: float) -> float:
    """P(F(df1, df2) > x), computed from the regularized incomplete beta function."""
    _check_df(df1, df2)
    if not x >= 0.0:
        raise ValueError(f"x must be nonnegative, got {x}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    z = df2 / (df2 + df1 * x)
    return float(betainc(0.5 * df2, 0.5 * df1, z))


def f_quantile(p: float, df1: float, df2: float) -> float:
    """x with P(F(df1, df2) <= x) = p, by bracketed root finding on the tail.

    Raises rather than clamping when no bracket or no converged root exists.
    """
    _check_df(df1, df2)
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie strictly inside (0, 1), got {p}")
    target = 1.0 - p  # upper-tail mass at the quantile
    lo, hi = 0.0, 1.0
    while f_upper_tail(hi, df1, df2) > target:
        lo = hi
        hi *= 2.0
        if hi > 1e300:
            raise ValueError(f"quantile bracket failed for p={p}, df=({df1}, {df2})")
    root, info = brentq(
        lambda t: f_upper_tail(t, df1, df2) - target,
        lo,
        hi,
        xtol=1e-12,
        rtol=1e-12,
        maxiter=200,
        full_output=True,
    )
    if not info.converged:
        raise ValueError(f"quantile root find did not converge for p={p}, df=({df1}, {df2})")
    return float(root)


@dataclass(frozen=True)
class GrsResult:
    """Pricing-test outcome: statistic, F reference distribution, critical values."""

    statistic: float
    df1: int
    df2: int
    p_value: float
    crit_5pct: float
    crit_10pct: float
    ridge_delta: float = 0.0


@lru_cache(maxsize=512)
def _crit(df1: int, df2: int, level: float) -> float:
    return f_quantile(1.0 - level, df1, df2)


def grs_statistic(fit: FirstPassFit, T: int | None = None) -> GrsResult:
    """Joint test of zero intercepts across all assets.

    The statistic scales the squared weighted intercepts by
    ``T (T-n-m) / (n (T-m-1))`` and shrinks them by the factor-mean
    adjustment ``1 / (1 + fbar' Omega^-1 fbar)``; under the null it follows
    F(n, T-n-m). Quadratic forms go through triangular factorizations, never
    an explicit inverse; any ridge applied to the residual covariance is
    reported in ``ridge_delta``.
    """
    n = fit.n_assets
    m = fit.n_factors
    if T is None:
        T = fit.n_periods
    elif T != fit.n_periods:
        raise ValueError(f"T={T} does not match the fit's {fit.n_periods} residual rows")
    df1 = n
    df2 = T - n - m
    if df2 < 1:
        raise ValueError(f"degrees of freedom T - n - m = {df2} must be positive")
    try:
        omega_chol = np.linalg.cholesky(fit.factor_cov)
    except np.linalg.LinAlgError:
        raise ValueError("singular factor covariance") from None
    z = solve_triangular(omega_chol, fit.factor_mean, lower=True)
    mean_adj = 1.0 + float(z @ z)
    sigma_chol, ridge = spd_cholesky(fit.resid_cov)
    quad = quad_form_inv(sigma_chol, fit.alpha)
    scale = T * (T - n - m) / (n * (T - m - 1))
    stat = scale * quad / mean_adj
    return GrsResult(
        statistic=float(stat),
        df1=df1,
        df2=df2,
        p_value=f_upper_tail(float(stat), df1, df2),
        crit_5pct=_crit(df1, df2, 0.05),
        crit_10pct=_crit(df1, df2, 0.10),
        ridge_delta=ridge,
    )
