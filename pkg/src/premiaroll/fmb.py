"""Two-pass premium estimation: time-series first pass, GLS cross-sectional second pass."""

from __future__ import annotations

import numpy as np
from dataclasses import dataclass
from scipy.linalg import solve_triangular

from ._linalg import solve_spd, spd_cholesky
from .panel import AlignedPanel

__all__ = [
    "FirstPassFit",
    "RiskPremiumEstimate",
    "first_pass",
    "fit_first_pass",
    "second_pass",
    "expected_premiums",
]


def _frozen_array(obj, name: str, value, ndim: int) -> None:
    arr = np.array(value, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    object.__setattr__(obj, name, arr)


@dataclass(frozen=True)
class FirstPassFit:
    """Per-asset time-series regression output plus the moment estimates.

    ``resid_cov`` uses divisor T - m - 1 and ``factor_cov`` divisor T, the
    conventions the pricing test is calibrated to. Instances are immutable
    and safe to share across threads.
    """

    alpha: np.ndarray        # n intercepts, excess-return units
    beta: np.ndarray         # n x m loadings
    residuals: np.ndarray    # T x n
    resid_cov: np.ndarray    # n x n
    factor_mean: np.ndarray  # m
    factor_cov: np.ndarray   # m x m

    def __post_init__(self) -> None:
        _frozen_array(self, "alpha", self.alpha, 1)
        _frozen_array(self, "beta", self.beta, 2)
        _frozen_array(self, "residuals", self.residuals, 2)
        _frozen_array(self, "resid_cov", self.resid_cov, 2)
        _frozen_array(self, "factor_mean", self.factor_mean, 1)
        _frozen_array(self, "factor_cov", self.factor_cov, 2)

    @property
    def n_assets(self) -> int:
        return self.alpha.shape[0]

    @property
    def n_factors(self) -> int:
        return self.beta.shape[1]

    @property
    def n_periods(self) -> int:
        return self.residuals.shape[0]


@dataclass(frozen=True)
class RiskPremiumEstimate:
    """Cross-sectional premium estimates with robust standard errors.

    ``expected_premia`` holds the per-factor sample means over the same
    window, the model-free benchmark the estimates are compared to.
    ``ridge_delta`` records any diagonal stabilization applied to the
    residual covariance before weighting (0.0 in the regular case).
    """

    premia: np.ndarray
    robust_se: np.ndarray
    cov_premia: np.ndarray
    expected_premia: np.ndarray
    ridge_delta: float = 0.0

    def __post_init__(self) -> None:
        _frozen_array(self, "premia", self.premia, 1)
        _frozen_array(self, "robust_se", self.robust_se, 1)
        _frozen_array(self, "cov_premia", self.cov_premia, 2)
        _frozen_array(self, "expected_premia", self.expected_premia, 1)


def fit_first_pass(excess_returns, factor_matrix) -> FirstPassFit:
    """Regress each excess-return column on [1, factors] and collect moments.

    With identical regressors in every equation the coefficients coincide
    with the joint GLS answer for any SPD error weighting, so no weighting
    argument exists. Requires T > n + m + 1 so the pricing test downstream
    has positive degrees of freedom.
    """
    returns = np.asarray(excess_returns, dtype=float)
    factors = np.asarray(factor_matrix, dtype=float)
    if returns.ndim != 2 or factors.ndim != 2:
        raise ValueError("excess returns and factors must be 2-dimensional")
    if returns.shape[0] != factors.shape[0]:
        raise ValueError("excess returns and factors must share the same number of rows")
    T, n = returns.shape
    m = factors.shape[1]
    if T <= n + m + 1:
        raise ValueError(f"need T > n + m + 1 observations, got T={T}, n={n}, m={m}")
    design = np.column_stack([np.ones(T), factors])
    coef, _, rank, _ = np.linalg.lstsq(design, returns, rcond=None)
    if rank < m + 1:
        raise ValueError("factor matrix is rank-deficient (constant or collinear column?)")
    alpha = coef[0]
    beta = coef[1:].T
    residuals = returns - design @ coef
    resid_cov = residuals.T @ residuals / (T - m - 1)
    resid_cov = 0.5 * (resid_cov + resid_cov.T)
    factor_mean = factors.mean(axis=0)
    centered = factors - factor_mean
    factor_cov = centered.T @ centered / T
    factor_cov = 0.5 * (factor_cov + factor_cov.T)
    return FirstPassFit(alpha, beta, residuals, resid_cov, factor_mean, factor_cov)


def first_pass(panel: AlignedPanel) -> FirstPassFit:
    """First-pass fit over a whole panel."""
    return fit_first_pass(panel.excess_returns, panel.factor_matrix)


def second_pass(fit: FirstPassFit, mean_excess, *, shanken: bool = False) -> RiskPremiumEstimate:
    """GLS cross-section of mean excess returns on the loadings, no intercept.

    The weighting matrix is the inverse first-pass residual covariance,
    applied through its Cholesky factor. Standard errors are
    heteroskedasticity-robust with an HC1 small-sample scaling; ``shanken``
    switches to the errors-in-variables corrected time-series covariance
    ``((B'S^-1 B)^-1 (1 + lam' W^-1 lam) + W) / T`` instead.
    """
    y = np.asarray(mean_excess, dtype=float)
    beta = fit.beta
    n, m = beta.shape
    if y.shape != (n,):
        raise ValueError(f"mean_excess must have length {n}, got shape {y.shape}")
    chol, ridge = spd_cholesky(fit.resid_cov)
    beta_w = solve_triangular(chol, beta, lower=True)
    y_w = solve_triangular(chol, y, lower=True)
    gram = beta_w.T @ beta_w
    try:
        gram_chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise ValueError("singular cross-sectional system (collinear loadings?)") from None
    premia = solve_triangular(
        gram_chol.T, solve_triangular(gram_chol, beta_w.T @ y_w, lower=True), lower=False
    )
    cross_resid = y - beta @ premia
    gram_inv = solve_spd(gram_chol, np.eye(m))
    if shanken:
        omega_chol, _ = spd_cholesky(fit.factor_cov)
        z = solve_triangular(omega_chol, premia, lower=True)
        cov = ((1.0 + float(z @ z)) * gram_inv + fit.factor_cov) / fit.n_periods
    else:
        weighted_beta = solve_spd(chol, beta)  # S^-1 B
        meat = weighted_beta.T @ (cross_resid[:, None] ** 2 * weighted_beta)
        cov = gram_inv @ meat @ gram_inv
        if n > m:
            cov *= n / (n - m)
    cov = 0.5 * (cov + cov.T)
    robust_se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return RiskPremiumEstimate(premia, robust_se, cov, fit.factor_mean, ridge)


def expected_premiums(panel_or_factors) -> np.ndarray:
    """Per-factor sample mean over the estimation window."""
    if isinstance(panel_or_factors, AlignedPanel):
        factors = panel_or_factors.factor_matrix
    else:
        factors = np.asarray(panel_or_factors, dtype=float)
        if factors.ndim != 2:
            raise ValueError("factor matrix must be 2-dimensional")
    return factors.mean(axis=0)
