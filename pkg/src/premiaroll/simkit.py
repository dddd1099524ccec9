"""Synthetic factor-model panels and the Monte Carlo verification harness."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date

import numpy as np

from .fmb import fit_first_pass, second_pass
from .grs import grs_statistic
from .panel import AlignedPanel

__all__ = ["DgpSpec", "McResult", "simulate", "mc_experiment", "random_spec", "trading_dates"]

_EIG_TOL = 1e-10


def trading_dates(count: int, start: date = date(1998, 1, 5)) -> tuple[date, ...]:
    """Synthetic weekday calendar for simulated panels; ``start`` must be a weekday."""
    stamps = np.busday_offset(np.datetime64(start, "D"), np.arange(count))
    return tuple(stamps.astype("datetime64[D]").tolist())


def _check_psd(mat: np.ndarray, name: str) -> None:
    if not np.allclose(mat, mat.T):
        raise ValueError(f"{name} must be symmetric")
    eigs = np.linalg.eigvalsh(mat)
    if eigs[0] < -_EIG_TOL * max(1.0, float(eigs[-1])):
        raise ValueError(f"{name} is not positive semidefinite")


def _psd_root(mat: np.ndarray) -> np.ndarray:
    """Matrix square root with M = root @ root.T; tolerates semidefinite input."""
    diag = np.diag(mat)
    if np.count_nonzero(mat - np.diag(diag)) == 0:
        return np.diag(np.sqrt(np.clip(diag, 0.0, None)))
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        eigs, vecs = np.linalg.eigh(mat)
        return vecs * np.sqrt(np.clip(eigs, 0.0, None))


@dataclass(frozen=True)
class DgpSpec:
    """Data-generating process for a synthetic panel.

    Factors draw with mean ``premia`` so the premium enters expected excess
    returns through the loadings; residuals are mean zero with covariance
    ``resid_cov`` (diagonal in the default setups, matching the assumption
    of uncorrelated idiosyncratic noise). A fixed seed pins the entire draw.
    """

    n: int
    m: int
    T: int
    alpha: np.ndarray
    beta: np.ndarray
    premia: np.ndarray
    factor_cov: np.ndarray
    resid_cov: np.ndarray
    seed: int = 0
    innovations: str = "gaussian"
    t_dof: float = 5.0

    def __post_init__(self) -> None:
        for name, value, shape in (
            ("alpha", self.alpha, (self.n,)),
            ("beta", self.beta, (self.n, self.m)),
            ("premia", self.premia, (self.m,)),
            ("factor_cov", self.factor_cov, (self.m, self.m)),
            ("resid_cov", self.resid_cov, (self.n, self.n)),
        ):
            arr = np.array(value, dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.m >= self.n:
            raise ValueError(f"need m < n, got m={self.m}, n={self.n}")
        if self.T < 1:
            raise ValueError("T must be positive")
        _check_psd(self.factor_cov, "factor_cov")
        _check_psd(self.resid_cov, "resid_cov")
        if self.innovations not in ("gaussian", "student_t"):
            raise ValueError("innovations must be 'gaussian' or 'student_t'")
        if self.innovations == "student_t" and self.t_dof <= 2.0:
            raise ValueError("t_dof must exceed 2 for finite variance")


def random_spec(
    n: int = 33,
    m: int = 9,
    T: int = 6300,
    seed: int = 0,
    *,
    alpha: np.ndarray | float | None = None,
    innovations: str = "gaussian",
    t_dof: float = 5.0,
) -> DgpSpec:
    """Reproducible desk-scale parameter draw in daily-return units."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    beta = rng.normal(1.0, 0.3, size=(n, m))
    premia = rng.normal(0.0, 3e-4, size=m)
    factor_vol = rng.uniform(0.004, 0.02, size=m)
    resid_vol = rng.uniform(0.005, 0.02, size=n)
    if alpha is None:
        alpha_vec = np.zeros(n)
    else:
        alpha_vec = np.broadcast_to(np.asarray(alpha, dtype=float), (n,)).copy()
    return DgpSpec(
        n=n,
        m=m,
        T=T,
        alpha=alpha_vec,
        beta=beta,
        premia=premia,
        factor_cov=np.diag(factor_vol**2),
        resid_cov=np.diag(resid_vol**2),
        seed=seed,
        innovations=innovations,
        t_dof=t_dof,
    )


def _innovations(rng: np.random.Generator, spec: DgpSpec, shape: tuple[int, int]) -> np.ndarray:
    if spec.innovations == "gaussian":
        return rng.standard_normal(shape)
    scale = np.sqrt(spec.t_dof / (spec.t_dof - 2.0))
    return rng.standard_t(spec.t_dof, size=shape) / scale


def draw_panel_arrays(spec: DgpSpec, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """One (excess_returns, factors) draw; exposed for harness-level reuse."""
    factor_shocks = _innovations(rng, spec, (spec.T, spec.m))
    resid_shocks = _innovations(rng, spec, (spec.T, spec.n))
    factors = spec.premia + factor_shocks @ _psd_root(spec.factor_cov).T
    resid = resid_shocks @ _psd_root(spec.resid_cov).T
    returns = spec.alpha + factors @ spec.beta.T + resid
    return returns, factors


def simulate(spec: DgpSpec) -> AlignedPanel:
    """Draw one synthetic panel; the same seed reproduces it bit for bit."""
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(1,)))
    returns, factors = draw_panel_arrays(spec, rng)
    asset_ids = tuple(f"A{i:02d}" for i in range(spec.n))
    factor_ids = tuple(f"F{j}" for j in range(spec.m))
    return AlignedPanel(trading_dates(spec.T), returns, asset_ids, factors, factor_ids)


@dataclass(frozen=True)
class McResult:
    """Aggregate size/power and estimator-accuracy table over replications.

    ``alpha_sd`` is the per-asset sampling standard deviation of the fitted
    intercepts across replications, the yardstick power grids are scaled by.
    Rates and moments aggregate over successful replications only; failures
    are counted separately.
    """

    reps: int
    test_level: float
    rejection_rate: float
    premia_bias: np.ndarray
    premia_rmse: np.ndarray
    beta_rmse: float
    alpha_sd: np.ndarray
    failures: int

    def rows(self) -> list[tuple[str, str, float]]:
        """Long-format (metric, series, value) rows for delimited output."""
        out: list[tuple[str, str, float]] = [
            ("rejection_rate", "", self.rejection_rate),
            ("beta_rmse", "", self.beta_rmse),
            ("failures", "", float(self.failures)),
            ("reps", "", float(self.reps)),
        ]
        for j, (bias, rmse) in enumerate(zip(self.premia_bias, self.premia_rmse)):
            out.append(("premia_bias", f"F{j}", float(bias)))
            out.append(("premia_rmse", f"F{j}", float(rmse)))
        for i, sd in enumerate(self.alpha_sd):
            out.append(("alpha_sd", f"A{i:02d}", float(sd)))
        return out


def _one_rep(spec: DgpSpec, rep: int, test_level: float):
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(2, rep)))
    returns, factors = draw_panel_arrays(spec, rng)
    try:
        fit = fit_first_pass(returns, factors)
        test = grs_statistic(fit, spec.T)
        premium = second_pass(fit, returns.mean(axis=0))
    except (ValueError, np.linalg.LinAlgError):
        return None
    return test.p_value < test_level, premium.premia, fit.alpha, fit.beta


def mc_experiment(
    spec: DgpSpec, reps: int, test_level: float = 0.05, threads: int = 1
) -> McResult:
    """Replicate the full pipeline and tabulate size/power and accuracy.

    Each replication derives its own seed from (spec.seed, rep index), so
    results do not depend on the worker count or schedule.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if not 0.0 < test_level < 1.0:
        raise ValueError("test_level must lie inside (0, 1)")
    if threads <= 1 or reps < 2:
        outcomes = [_one_rep(spec, r, test_level) for r in range(reps)]
    else:
        chunks = np.array_split(np.arange(reps), min(threads, reps))

        def run(chunk: np.ndarray):
            return [_one_rep(spec, int(r), test_level) for r in chunk]

        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(run, chunks))
        outcomes = [o for part in parts for o in part]

    kept = [o for o in outcomes if o is not None]
    failures = reps - len(kept)
    if not kept:
        return McResult(
            reps=reps,
            test_level=test_level,
            rejection_rate=float("nan"),
            premia_bias=np.full(spec.m, np.nan),
            premia_rmse=np.full(spec.m, np.nan),
            beta_rmse=float("nan"),
            alpha_sd=np.full(spec.n, np.nan),
            failures=failures,
        )
    rejections = np.array([o[0] for o in kept], dtype=float)
    premia = np.array([o[1] for o in kept])
    alphas = np.array([o[2] for o in kept])
    betas = np.array([o[3] for o in kept])
    premia_err = premia - spec.premia
    ddof = 1 if len(kept) > 1 else 0
    return McResult(
        reps=reps,
        test_level=test_level,
        rejection_rate=float(rejections.mean()),
        premia_bias=premia_err.mean(axis=0),
        premia_rmse=np.sqrt((premia_err**2).mean(axis=0)),
        beta_rmse=float(np.sqrt(((betas - spec.beta) ** 2).mean())),
        alpha_sd=alphas.std(axis=0, ddof=ddof),
        failures=failures,
    )
