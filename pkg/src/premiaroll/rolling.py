"""Rolling-window sweep of the two-pass estimator and the pricing test."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date

import numpy as np

from .fmb import RiskPremiumEstimate, fit_first_pass, second_pass
from .grs import GrsResult, grs_statistic
from .panel import AlignedPanel

__all__ = [
    "WindowPlan",
    "WindowResult",
    "RollingSeries",
    "plan_windows",
    "roll",
    "premium_correlation",
]

# Windows with fewer residual degrees of freedom than this are computed but flagged.
LOW_DF_THRESHOLD = 30


@dataclass(frozen=True)
class WindowPlan:
    """Exhaustive ordered windows of fixed width advanced by a fixed step.

    ``windows`` holds half-open row ranges ``[start, stop)``; every range has
    exactly ``width`` rows and there are ``floor((T - width) / step) + 1`` of
    them. Results are stamped at the window top, the most recent date inside
    each window.
    """

    width: int
    step: int
    windows: tuple[tuple[int, int], ...]


def plan_windows(T: int, width: int, step: int = 1) -> WindowPlan:
    """Plan every window of ``width`` rows over a panel of ``T`` rows."""
    if width < 1:
        raise ValueError("window width must be >= 1")
    if step < 1:
        raise ValueError("step must be >= 1")
    if width > T:
        raise ValueError(f"window width {width} exceeds panel length {T}")
    windows = tuple((start, start + width) for start in range(0, T - width + 1, step))
    return WindowPlan(width, step, windows)


@dataclass(frozen=True)
class WindowResult:
    """Per-window outputs; failed windows keep their stamp and carry the error."""

    date: date
    grs: GrsResult | None
    premium: RiskPremiumEstimate | None
    flags: tuple[str, ...] = ()
    error: str | None = None


@dataclass(frozen=True)
class RollingSeries:
    """Window-top-stamped sequences of pricing-test and premium results."""

    dates: tuple[date, ...]
    factor_ids: tuple[str, ...]
    results: tuple[WindowResult, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "factor_ids", tuple(self.factor_ids))
        object.__setattr__(self, "results", tuple(self.results))
        if len(self.dates) != len(self.results):
            raise ValueError("dates and results must share the same length")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise ValueError("window dates must be strictly increasing")

    def __len__(self) -> int:
        return len(self.results)

    def grs_stats(self) -> np.ndarray:
        return np.array([r.grs.statistic if r.grs else np.nan for r in self.results])

    def grs_p_values(self) -> np.ndarray:
        return np.array([r.grs.p_value if r.grs else np.nan for r in self.results])

    def premium_matrix(self) -> np.ndarray:
        m = len(self.factor_ids)
        out = np.full((len(self.results), m), np.nan)
        for i, r in enumerate(self.results):
            if r.premium is not None:
                out[i] = r.premium.premia
        return out

    def se_matrix(self) -> np.ndarray:
        m = len(self.factor_ids)
        out = np.full((len(self.results), m), np.nan)
        for i, r in enumerate(self.results):
            if r.premium is not None:
                out[i] = r.premium.robust_se
        return out

    @property
    def ci_95(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-factor 95 percent bands, premia +/- 1.96 robust SEs."""
        premia = self.premium_matrix()
        half = 1.96 * self.se_matrix()
        return premia - half, premia + half

    @property
    def n_failed(self) -> int:
        return sum(1 for r in self.results if r.error is not None)

    @property
    def n_ridged(self) -> int:
        return sum(1 for r in self.results if "ridge" in r.flags)


def _window_result(panel: AlignedPanel, start: int, stop: int) -> WindowResult:
    stamp = panel.dates[stop - 1]
    width = stop - start
    flags: list[str] = []
    if width - panel.n_assets - panel.n_factors < LOW_DF_THRESHOLD:
        flags.append("low_df")
    returns = panel.excess_returns[start:stop]
    factors = panel.factor_matrix[start:stop]
    try:
        fit = fit_first_pass(returns, factors)
        test = grs_statistic(fit, width)
        premium = second_pass(fit, returns.mean(axis=0))
    except (ValueError, np.linalg.LinAlgError) as exc:
        return WindowResult(stamp, None, None, tuple(flags + ["failed"]), str(exc))
    if test.ridge_delta > 0.0 or premium.ridge_delta > 0.0:
        flags.append("ridge")
    return WindowResult(stamp, test, premium, tuple(flags))


def roll(panel: AlignedPanel, plan: WindowPlan, threads: int = 1) -> RollingSeries:
    """Run first pass, pricing test, and second pass over every window.

    Windows are independent; with ``threads > 1`` they are partitioned into
    contiguous chunks over read-only panel views and merged back in order,
    so the output is identical for any worker count. Per-window failures
    become flagged rows rather than aborting the sweep.
    """
    windows = plan.windows
    if not windows:
        raise ValueError("empty window plan")
    if threads <= 1 or len(windows) < 2:
        results = [_window_result(panel, start, stop) for start, stop in windows]
    else:
        chunks = np.array_split(np.arange(len(windows)), min(threads, len(windows)))

        def run(chunk: np.ndarray) -> list[WindowResult]:
            return [_window_result(panel, *windows[i]) for i in chunk]

        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(run, chunks))
        results = [result for part in parts for result in part]
    dates = tuple(r.date for r in results)
    return RollingSeries(dates, panel.factor_ids, tuple(results))


def premium_correlation(series: RollingSeries, factor_a: str, factor_b: str) -> float:
    """Pearson correlation between two rolling premium series.

    Windows where either estimate is missing are dropped pairwise.
    """
    try:
        ia = series.factor_ids.index(factor_a)
        ib = series.factor_ids.index(factor_b)
    except ValueError:
        raise ValueError(
            f"factor not in series: wanted {factor_a!r}, {factor_b!r}, "
            f"have {series.factor_ids}"
        ) from None
    premia = series.premium_matrix()
    a, b = premia[:, ia], premia[:, ib]
    keep = np.isfinite(a) & np.isfinite(b)
    a, b = a[keep], b[keep]
    if a.size < 2:
        raise ValueError("fewer than two usable windows")
    if np.std(a) == 0.0 or np.std(b) == 0.0:
        raise ValueError("zero-variance premium series")
    return float(np.corrcoef(a, b)[0, 1])
