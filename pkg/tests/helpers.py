"""Independent oracles used by the test suite.

Everything here deliberately takes a different computational route from the
package code: dense explicit inverses, quadrature, and brute-force loops.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad


def f_density(x: float, df1: float, df2: float) -> float:
    """F density evaluated through its log to dodge overflow."""
    if x <= 0.0:
        return 0.0
    a, b = 0.5 * df1, 0.5 * df2
    log_pdf = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(df1 / df2)
        + (a - 1.0) * math.log(x)
        - (a + b) * math.log1p(df1 * x / df2)
    )
    return math.exp(log_pdf)


def f_tail_by_quadrature(x: float, df1: float, df2: float) -> float:
    """Upper-tail F probability by adaptive quadrature of the density."""
    tail, _ = quad(
        f_density, x, np.inf, args=(df1, df2), epsabs=1e-12, epsrel=1e-12, limit=400
    )
    return tail


def sur_gls_coefficients(returns: np.ndarray, factors: np.ndarray, weight: np.ndarray) -> np.ndarray:
    """Joint GLS of a multi-equation system with shared regressors.

    Stacks the equations and solves the full Kronecker normal equations with
    explicit dense inverses. ``weight`` is the cross-equation error
    covariance. Returns coefficients with shape (1 + m, n).
    """
    T, n = returns.shape
    design = np.column_stack([np.ones(T), factors])
    k = design.shape[1]
    w_inv = np.linalg.inv(weight)
    lhs = np.kron(w_inv, design.T @ design)
    rhs = (design.T @ returns @ w_inv).reshape(k * n, order="F")
    packed = np.linalg.solve(lhs, rhs)
    return packed.reshape((k, n), order="F")


def gls_cross_section(beta: np.ndarray, y: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Brute-force weighted cross-sectional solve with explicit inverses."""
    sigma_inv = np.linalg.inv(sigma)
    return np.linalg.inv(beta.T @ sigma_inv @ beta) @ (beta.T @ sigma_inv @ y)


def newey_west_variance_of_mean(series: np.ndarray, max_lag: int) -> float:
    """Long-run variance of the sample mean with Bartlett weights."""
    x = np.asarray(series, dtype=float)
    x = x - x.mean()
    T = x.shape[0]
    gamma0 = float(x @ x) / T
    total = gamma0
    for lag in range(1, min(max_lag, T - 1) + 1):
        cov = float(x[lag:] @ x[:-lag]) / T
        total += 2.0 * (1.0 - lag / (max_lag + 1.0)) * cov
    return max(total, 0.0) / T


def block_bootstrap_mean_interval(
    values: np.ndarray, block: int, n_boot: int, level: float, rng: np.random.Generator
) -> tuple[float, float]:
    """Percentile interval for the mean under a moving-block bootstrap."""
    x = np.asarray(values, dtype=float)
    T = x.shape[0]
    block = min(block, T)
    n_blocks = math.ceil(T / block)
    starts_max = T - block + 1
    means = np.empty(n_boot)
    for i in range(n_boot):
        starts = rng.integers(0, starts_max, size=n_blocks)
        sample = np.concatenate([x[s : s + block] for s in starts])[:T]
        means[i] = sample.mean()
    half = 0.5 * (1.0 - level)
    lo, hi = np.quantile(means, [half, 1.0 - half])
    return float(lo), float(hi)


def dickey_fuller_t_stat(y: np.ndarray) -> float:
    """t-ratio on the lagged level in the lag-0 regression with constant.

    Closed-form simple-regression arithmetic, independent of the package's
    QR-based path.
    """
    dy = np.diff(y)
    x = y[:-1]
    xc = x - x.mean()
    dc = dy - dy.mean()
    sxx = float(xc @ xc)
    gamma = float(xc @ dc) / sxx
    resid = dc - gamma * xc
    nobs = dy.shape[0]
    s2 = float(resid @ resid) / (nobs - 2)
    return gamma / math.sqrt(s2 / sxx)
