"""Shared dense linear-algebra helpers for symmetric positive-definite systems."""

from __future__ import annotations

import numpy as np
from scipy.linalg import cholesky, solve_triangular

# Condition-number ceiling before ridge stabilization kicks in.
COND_MAX = 1e12
# Initial ridge size, as a fraction of the mean diagonal mass.
RIDGE_DELTA0 = 1e-8
# Tenfold ridge escalations allowed before giving up.
RIDGE_MAX_STEPS = 14


def spd_cholesky(mat: np.ndarray, *, cond_max: float = COND_MAX,
                 delta0: float = RIDGE_DELTA0) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of a symmetric matrix, ridge-stabilized if needed.

    Returns ``(L, ridge)`` where ``ridge`` is the absolute amount added to the
    diagonal; 0.0 means the matrix factorized as given. Stabilization adds
    ``delta * trace(mat)/k`` to the diagonal, escalating ``delta`` by decades
    from ``delta0`` until the spectrum condition number drops below
    ``cond_max``. A zero-trace matrix falls back to an absolute ridge so the
    degenerate noiseless case stays solvable.
    """
    mat = np.asarray(mat, dtype=float)
    k = mat.shape[0]
    eigs = np.linalg.eigvalsh(mat)
    lo, hi = float(eigs[0]), float(eigs[-1])
    ridge = 0.0
    if lo <= 0.0 or hi / lo > cond_max:
        scale = float(np.trace(mat)) / k
        if scale <= 0.0:
            scale = 1.0
        delta = delta0
        for _ in range(RIDGE_MAX_STEPS):
            ridge = delta * scale
            if lo + ridge > 0.0 and (hi + ridge) / (lo + ridge) <= cond_max:
                break
            delta *= 10.0
        else:
            raise ValueError("matrix could not be stabilized to a positive-definite factorization")
        mat = mat + ridge * np.eye(k)
    return cholesky(mat, lower=True), ridge


def quad_form_inv(L: np.ndarray, vec: np.ndarray) -> float:
    """``vec' M^{-1} vec`` given the lower Cholesky factor ``L`` of ``M``."""
    z = solve_triangular(L, vec, lower=True)
    return float(z @ z)


def solve_spd(L: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """``M^{-1} rhs`` given the lower Cholesky factor ``L`` of ``M``."""
    return solve_triangular(L.T, solve_triangular(L, rhs, lower=True), lower=False)
