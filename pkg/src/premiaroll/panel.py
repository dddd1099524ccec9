"""Asset/factor panel data model: CSV ingestion, calendar alignment, excess returns."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

__all__ = [
    "RawSeries",
    "CalendarPolicy",
    "CsvSchema",
    "AlignedPanel",
    "AlignmentAction",
    "load_csv",
    "to_returns",
    "align",
    "align_calendars",
    "excess",
]

_JOIN_MODES = ("intersection", "union_with_forward_fill")


def _readonly(values, ndim: int) -> np.ndarray:
    out = np.array(values, dtype=float)
    if out.ndim != ndim:
        raise ValueError(f"expected a {ndim}-dimensional array, got shape {out.shape}")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class RawSeries:
    """A dated market series: an index level, a rate, or a derived return.

    Dates must be strictly increasing and every value finite.
    """

    id: str
    dates: tuple[date, ...]
    values: np.ndarray
    units: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "values", _readonly(self.values, 1))
        if len(self.dates) != self.values.shape[0]:
            raise ValueError(
                f"series {self.id!r}: {len(self.dates)} dates vs {self.values.shape[0]} values"
            )
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur == prev:
                raise ValueError(f"series {self.id!r}: duplicate date {prev.isoformat()}")
            if cur < prev:
                raise ValueError(f"series {self.id!r}: dates not increasing at {cur.isoformat()}")
        if not np.all(np.isfinite(self.values)):
            bad = int(np.flatnonzero(~np.isfinite(self.values))[0])
            raise ValueError(
                f"series {self.id!r}: non-finite value at {self.dates[bad].isoformat()}"
            )

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class CalendarPolicy:
    """How to reconcile series quoted on different trading calendars.

    ``intersection`` keeps only dates present in every series.
    ``union_with_forward_fill`` keeps the union of dates over the overlapping
    span and carries each series' last observation forward, but never across
    more than ``max_fill_gap`` calendar days.
    """

    join_mode: str = "intersection"
    max_fill_gap: int = 5

    def __post_init__(self) -> None:
        if self.join_mode not in _JOIN_MODES:
            raise ValueError(f"join_mode must be one of {_JOIN_MODES}, got {self.join_mode!r}")
        if self.max_fill_gap < 0:
            raise ValueError("max_fill_gap must be >= 0")


@dataclass(frozen=True)
class CsvSchema:
    """Column mapping for a delimited input file.

    ``value_columns=None`` means every non-date column.
    """

    date_column: str = "date"
    value_columns: tuple[str, ...] | None = None
    delimiter: str = ","


@dataclass(frozen=True)
class AlignmentAction:
    """One calendar-reconciliation event, for the alignment report."""

    date: date
    series: str
    action: str  # "dropped" or "filled"


def load_csv(path, schema: CsvSchema = CsvSchema()) -> tuple[list[RawSeries], list[int]]:
    """Parse a delimited file into one :class:`RawSeries` per value column.

    Rows whose date cell does not parse as ISO-8601 are skipped; their
    1-based row numbers are returned alongside the series so callers can
    report them. Duplicate dates and blank or non-numeric value cells raise
    ``ValueError`` naming the offending date or row/column.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle, delimiter=schema.delimiter)
        try:
            header = [cell.strip() for cell in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if schema.date_column not in header:
            raise ValueError(f"{path}: date column {schema.date_column!r} not in header {header}")
        date_idx = header.index(schema.date_column)
        if schema.value_columns is None:
            value_cols = [h for h in header if h != schema.date_column]
        else:
            missing = [c for c in schema.value_columns if c not in header]
            if missing:
                raise ValueError(f"{path}: value column(s) {missing} not in header {header}")
            value_cols = list(schema.value_columns)
        if not value_cols:
            raise ValueError(f"{path}: no value columns")
        col_idx = [header.index(c) for c in value_cols]

        stamps: list[date] = []
        rows: list[list[float]] = []
        rejected: list[int] = []
        seen: set[date] = set()
        for rownum, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: row {rownum} has {len(row)} fields, expected {len(header)}"
                )
            try:
                stamp = date.fromisoformat(row[date_idx].strip())
            except ValueError:
                rejected.append(rownum)
                continue
            if stamp in seen:
                raise ValueError(f"{path}: duplicate date {stamp.isoformat()} (row {rownum})")
            seen.add(stamp)
            parsed = []
            for name, idx in zip(value_cols, col_idx):
                cell = row[idx].strip()
                try:
                    value = float(cell)
                except ValueError:
                    value = math.nan
                if not math.isfinite(value):
                    raise ValueError(
                        f"{path}: non-numeric value in row {rownum}, column {name!r}: {cell!r}"
                    )
                parsed.append(value)
            stamps.append(stamp)
            rows.append(parsed)
    if not stamps:
        raise ValueError(f"{path}: no parseable data rows")
    order = sorted(range(len(stamps)), key=stamps.__getitem__)
    stamps = [stamps[i] for i in order]
    matrix = np.asarray(rows, dtype=float)[order]
    series = [
        RawSeries(name, tuple(stamps), matrix[:, j]) for j, name in enumerate(value_cols)
    ]
    return series, rejected


def to_returns(series: RawSeries, kind: str = "log") -> RawSeries:
    """Convert a level series to per-period returns; the first date drops out."""
    if kind not in ("log", "simple"):
        raise ValueError(f"kind must be 'log' or 'simple', got {kind!r}")
    if len(series) < 2:
        raise ValueError(f"series {series.id!r}: need at least 2 observations for returns")
    levels = series.values
    if kind == "log":
        if np.any(levels <= 0.0):
            bad = int(np.flatnonzero(levels <= 0.0)[0])
            raise ValueError(
                f"series {series.id!r}: nonpositive level at "
                f"{series.dates[bad].isoformat()} under log returns"
            )
        out = np.diff(np.log(levels))
    else:
        out = levels[1:] / levels[:-1] - 1.0
    return RawSeries(series.id, series.dates[1:], out, units="return")


def excess(returns: np.ndarray, risk_free: np.ndarray) -> np.ndarray:
    """Subtract the per-period risk-free rate from every return column."""
    returns = np.asarray(returns, dtype=float)
    risk_free = np.asarray(risk_free, dtype=float)
    if returns.ndim != 2 or risk_free.ndim != 1:
        raise ValueError("returns must be T x n and risk_free a length-T vector")
    if returns.shape[0] != risk_free.shape[0]:
        raise ValueError(
            f"length mismatch: {returns.shape[0]} return rows vs "
            f"{risk_free.shape[0]} risk-free observations"
        )
    return returns - risk_free[:, None]


@dataclass(frozen=True)
class AlignedPanel:
    """Calendar-aligned excess returns (T x n) and factor values (T x m).

    The factor count must stay strictly below the asset count, every entry
    must be finite, and ids must be unique. Arrays are stored read-only;
    a constructed panel is safe to share across threads.
    """

    dates: tuple[date, ...]
    excess_returns: np.ndarray
    asset_ids: tuple[str, ...]
    factor_matrix: np.ndarray
    factor_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "asset_ids", tuple(self.asset_ids))
        object.__setattr__(self, "factor_ids", tuple(self.factor_ids))
        object.__setattr__(self, "excess_returns", _readonly(self.excess_returns, 2))
        object.__setattr__(self, "factor_matrix", _readonly(self.factor_matrix, 2))
        T = len(self.dates)
        n = self.excess_returns.shape[1]
        m = self.factor_matrix.shape[1]
        if self.excess_returns.shape[0] != T or self.factor_matrix.shape[0] != T:
            raise ValueError("returns, factors, and dates must share the same length")
        if n < 1 or m < 1:
            raise ValueError("panel needs at least one asset and one factor")
        if m >= n:
            raise ValueError(f"factor count m={m} must stay below asset count n={n}")
        if len(self.asset_ids) != n or len(self.factor_ids) != m:
            raise ValueError("id lists must match matrix widths")
        ids = self.asset_ids + self.factor_ids
        if len(set(ids)) != len(ids):
            raise ValueError("asset and factor ids must be unique")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise ValueError(f"panel dates not strictly increasing at {cur.isoformat()}")
        if not np.all(np.isfinite(self.excess_returns)):
            raise ValueError("excess returns contain non-finite entries")
        if not np.all(np.isfinite(self.factor_matrix)):
            raise ValueError("factor matrix contains non-finite entries")

    @property
    def n_periods(self) -> int:
        return len(self.dates)

    @property
    def n_assets(self) -> int:
        return self.excess_returns.shape[1]

    @property
    def n_factors(self) -> int:
        return self.factor_matrix.shape[1]


def align_calendars(
    series_list: list[RawSeries], policy: CalendarPolicy = CalendarPolicy()
) -> tuple[list[RawSeries], list[AlignmentAction]]:
    """Put every series on one calendar under the given policy.

    Returns the aligned series plus the report of dropped/filled dates.
    Dropped dates are attributed to the series that was missing them.
    """
    if not series_list:
        raise ValueError("no series to align")
    date_sets = [set(s.dates) for s in series_list]
    union = set().union(*date_sets)
    actions: list[AlignmentAction] = []

    if policy.join_mode == "intersection":
        common = set.intersection(*date_sets)
        if not common:
            raise ValueError("empty intersection of calendars")
        calendar = sorted(common)
        aligned = []
        for s, ds in zip(series_list, date_sets):
            for d in sorted(union - ds):
                actions.append(AlignmentAction(d, s.id, "dropped"))
            mask = np.fromiter((d in common for d in s.dates), dtype=bool, count=len(s))
            aligned.append(RawSeries(s.id, tuple(calendar), s.values[mask], s.units))
        actions.sort(key=lambda a: (a.date, a.series))
        return aligned, actions

    start = max(s.dates[0] for s in series_list)
    end = min(s.dates[-1] for s in series_list)
    if start > end:
        raise ValueError("calendars do not overlap")
    calendar = sorted(d for d in union if start <= d <= end)
    aligned = []
    for s in series_list:
        for d in s.dates:
            if d < start or d > end:
                actions.append(AlignmentAction(d, s.id, "dropped"))
        values = np.empty(len(calendar))
        own = dict(zip(s.dates, s.values.tolist()))
        ptr = 0
        for i, d in enumerate(calendar):
            if d in own:
                values[i] = own[d]
                continue
            while ptr + 1 < len(s.dates) and s.dates[ptr + 1] <= d:
                ptr += 1
            last = s.dates[ptr]
            gap = (d - last).days
            if gap > policy.max_fill_gap:
                raise ValueError(
                    f"fill gap exceeded for series {s.id!r} at {d.isoformat()}: "
                    f"last observation {last.isoformat()} is {gap} days back "
                    f"(max_fill_gap={policy.max_fill_gap})"
                )
            values[i] = own[last]
            actions.append(AlignmentAction(d, s.id, "filled"))
        aligned.append(RawSeries(s.id, tuple(calendar), values, s.units))
    actions.sort(key=lambda a: (a.date, a.series))
    return aligned, actions


def align(
    asset_series: list[RawSeries],
    factor_series: list[RawSeries],
    policy: CalendarPolicy = CalendarPolicy(),
) -> tuple[AlignedPanel, list[AlignmentAction]]:
    """Join role-tagged series onto one calendar and assemble the panel.

    Asset series must already hold excess returns; factor series hold
    finished factor values.
    """
    if not asset_series or not factor_series:
        raise ValueError("need at least one asset series and one factor series")
    aligned, actions = align_calendars(list(asset_series) + list(factor_series), policy)
    k = len(asset_series)
    dates = aligned[0].dates
    returns = np.column_stack([s.values for s in aligned[:k]])
    factors = np.column_stack([s.values for s in aligned[k:]])
    panel = AlignedPanel(
        dates,
        returns,
        tuple(s.id for s in aligned[:k]),
        factors,
        tuple(s.id for s in aligned[k:]),
    )
    return panel, actions
