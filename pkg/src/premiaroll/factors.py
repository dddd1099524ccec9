"""Construction of market, spread, inflation-surprise, and volatility factors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .panel import RawSeries

__all__ = [
    "FactorSpec",
    "UiState",
    "build_excess_market",
    "build_spread",
    "build_ui",
    "build_vix_factor",
    "build_factors",
]

# Recipe name -> number of input series it consumes.
RECIPE_ARITY = {
    "excess_return": 2,          # market level series, per-period risk-free rate
    "index_return": 1,           # level series
    "forward_spread": 2,         # forward level, spot level
    "yield_spread": 2,           # long-leg rate, short-leg rate
    "credit_spread": 2,          # corporate yield, government yield
    "forward_premium": 2,        # forward rate, spot rate
    "unexpected_inflation": 2,   # realized inflation, per-period risk-free rate
    "volatility_change": 1,      # implied-volatility level series
}


@dataclass(frozen=True)
class FactorSpec:
    """One named factor: which recipe to run and on which input series."""

    id: str
    recipe: str
    inputs: tuple[str, ...]
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if self.recipe not in RECIPE_ARITY:
            raise ValueError(
                f"factor {self.id!r}: unknown recipe {self.recipe!r} "
                f"(expected one of {sorted(RECIPE_ARITY)})"
            )
        want = RECIPE_ARITY[self.recipe]
        if len(self.inputs) != want:
            raise ValueError(
                f"factor {self.id!r}: recipe {self.recipe!r} takes {want} input(s), "
                f"got {len(self.inputs)}"
            )


@dataclass(frozen=True)
class UiState:
    """Trailing state for the inflation-surprise recursion.

    ``window_k`` is the smoothing span for the ex-ante real rate; ``history``
    seeds the recursion with ex-post real-rate values that precede the first
    observation (at most ``window_k`` of them).
    """

    window_k: int = 60
    history: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "history", tuple(float(v) for v in self.history))
        if self.window_k < 1:
            raise ValueError("window_k must be >= 1")
        if len(self.history) > self.window_k:
            raise ValueError("history cannot exceed window_k values")


def _check_lengths(*arrays: np.ndarray) -> None:
    lengths = {a.shape[0] for a in arrays}
    if len(lengths) != 1:
        raise ValueError(f"input series lengths differ: {sorted(lengths)}")


def build_excess_market(market_returns, risk_free) -> np.ndarray:
    """Market return minus the per-period risk-free rate."""
    market_returns = np.asarray(market_returns, dtype=float)
    risk_free = np.asarray(risk_free, dtype=float)
    _check_lengths(market_returns, risk_free)
    return market_returns - risk_free


def build_spread(long_leg, short_leg, mode: str = "arithmetic") -> np.ndarray:
    """Difference between two legs, either level-wise or in logs.

    ``arithmetic`` returns ``long - short`` (yield and credit spreads);
    ``log`` returns ``ln(long) - ln(short)`` (forward spreads and premiums),
    which requires strictly positive legs.
    """
    long_leg = np.asarray(long_leg, dtype=float)
    short_leg = np.asarray(short_leg, dtype=float)
    _check_lengths(long_leg, short_leg)
    if mode == "arithmetic":
        return long_leg - short_leg
    if mode == "log":
        if np.any(long_leg <= 0.0) or np.any(short_leg <= 0.0):
            raise ValueError("nonpositive price under log spread")
        return np.log(long_leg) - np.log(short_leg)
    raise ValueError(f"mode must be 'arithmetic' or 'log', got {mode!r}")


def build_ui(inflation, risk_free, state: UiState | int = 60) -> np.ndarray:
    """Inflation surprise: realized inflation minus its one-step-ahead expectation.

    The expectation is built from the nominal rate and a trailing-mean
    estimate of the ex-ante real rate::

        rr_t     = rf_t - infl_t                  (ex-post real rate)
        e_{t-1}  = mean(rr over the last window_k values before t)
        E[infl_t]= rf_t - e_{t-1}
        ui_t     = infl_t - E[infl_t]

    The first outputs, where the trailing window is not yet full, are burn-in
    and come back as NaN; callers trim them panel-wide.
    """
    if isinstance(state, int):
        state = UiState(window_k=state)
    inflation = np.asarray(inflation, dtype=float)
    risk_free = np.asarray(risk_free, dtype=float)
    _check_lengths(inflation, risk_free)
    k = state.window_k
    h = len(state.history)
    count = inflation.shape[0]
    if count + h <= k:
        raise ValueError(
            f"insufficient history: window_k={k} needs more than {count + h} "
            "real-rate observations"
        )
    rr = np.concatenate([np.asarray(state.history, dtype=float), risk_free - inflation])
    csum = np.concatenate([[0.0], np.cumsum(rr)])
    out = np.full(count, np.nan)
    first = max(k - h, 0)
    idx = np.arange(first, count)
    ante = (csum[idx + h] - csum[idx + h - k]) / k
    out[idx] = inflation[idx] - (risk_free[idx] - ante)
    return out


def build_vix_factor(vix_levels, transform: str = "log_diff") -> np.ndarray:
    """Implied-volatility factor from index levels.

    ``log_diff`` (default) gives the first difference of the log level so the
    factor is return-like; ``diff`` and ``level`` variants are selectable.
    The differenced variants return NaN for the first observation.
    """
    levels = np.asarray(vix_levels, dtype=float)
    if transform == "level":
        return levels.copy()
    out = np.full(levels.shape[0], np.nan)
    if transform == "log_diff":
        if np.any(levels <= 0.0):
            raise ValueError("nonpositive volatility level under log transform")
        out[1:] = np.diff(np.log(levels))
        return out
    if transform == "diff":
        out[1:] = np.diff(levels)
        return out
    raise ValueError(f"transform must be 'log_diff', 'diff', or 'level', got {transform!r}")


def _apply_recipe(spec: FactorSpec, inputs: list[np.ndarray]) -> np.ndarray:
    params = spec.params
    if spec.recipe == "excess_return":
        kind = str(params.get("kind", "log"))
        levels, rf = inputs
        out = np.full(levels.shape[0], np.nan)
        if kind == "log":
            if np.any(levels <= 0.0):
                raise ValueError(f"factor {spec.id!r}: nonpositive level under log returns")
            rets = np.diff(np.log(levels))
        elif kind == "simple":
            rets = levels[1:] / levels[:-1] - 1.0
        else:
            raise ValueError(f"factor {spec.id!r}: kind must be 'log' or 'simple'")
        out[1:] = build_excess_market(rets, rf[1:])
        return out
    if spec.recipe == "index_return":
        kind = str(params.get("kind", "log"))
        (levels,) = inputs
        out = np.full(levels.shape[0], np.nan)
        if kind == "log":
            if np.any(levels <= 0.0):
                raise ValueError(f"factor {spec.id!r}: nonpositive level under log returns")
            out[1:] = np.diff(np.log(levels))
        elif kind == "simple":
            out[1:] = levels[1:] / levels[:-1] - 1.0
        else:
            raise ValueError(f"factor {spec.id!r}: kind must be 'log' or 'simple'")
        return out
    if spec.recipe in ("forward_spread", "forward_premium"):
        mode = str(params.get("mode", "log"))
        return build_spread(inputs[0], inputs[1], mode=mode)
    if spec.recipe in ("yield_spread", "credit_spread"):
        mode = str(params.get("mode", "arithmetic"))
        return build_spread(inputs[0], inputs[1], mode=mode)
    if spec.recipe == "unexpected_inflation":
        window_k = int(params.get("window_k", 60))
        return build_ui(inputs[0], inputs[1], UiState(window_k=window_k))
    if spec.recipe == "volatility_change":
        transform = str(params.get("transform", "log_diff"))
        return build_vix_factor(inputs[0], transform=transform)
    raise AssertionError(f"unhandled recipe {spec.recipe!r}")


def build_factors(
    specs: list[FactorSpec],
    series: Mapping[str, RawSeries],
    demean: bool = False,
) -> list[RawSeries]:
    """Run every factor recipe over calendar-aligned input series.

    All inputs must share one calendar. Burn-in values (NaN heads from
    differencing or the inflation recursion) are trimmed per factor, so the
    returned series may start later than their inputs; a final intersection
    join trims the panel to the common span. Factors are not demeaned by
    default because the pricing test uses the raw factor mean; ``demean``
    exists for experimentation.
    """
    if not specs:
        raise ValueError("no factor specs given")
    calendar: tuple | None = None
    for spec in specs:
        for name in spec.inputs:
            if name not in series:
                raise ValueError(f"factor {spec.id!r}: input series {name!r} not found")
            if calendar is None:
                calendar = series[name].dates
            elif series[name].dates != calendar:
                raise ValueError(
                    f"factor {spec.id!r}: input {name!r} is not on the shared calendar"
                )
    out = []
    for spec in specs:
        inputs = [series[name].values for name in spec.inputs]
        values = _apply_recipe(spec, inputs)
        finite = np.isfinite(values)
        burn = int(np.argmax(finite)) if finite.any() else len(values)
        if not finite[burn:].all():
            raise ValueError(f"factor {spec.id!r}: non-finite values after burn-in")
        trimmed = values[burn:]
        if trimmed.size == 0:
            raise ValueError(f"factor {spec.id!r}: no observations left after burn-in")
        if demean:
            trimmed = trimmed - trimmed.mean()
        dates = series[spec.inputs[0]].dates[burn:]
        out.append(RawSeries(spec.id, dates, trimmed, units="factor"))
    return out
