"""Config-driven ingestion, panel caching, and delimited report writing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig
from .factors import FactorSpec, build_factors
from .panel import (
    AlignedPanel,
    AlignmentAction,
    CalendarPolicy,
    CsvSchema,
    RawSeries,
    align,
    align_calendars,
    load_csv,
    to_returns,
)

RISK_FREE_ID = "RF"  # reserved id for the converted per-period risk-free rate

DEFAULT_RISK_FREE_DIVISOR = 245.0  # approximate trading days per year


def fmt(value) -> str:
    """Deterministic cell text: shortest round-trip floats, ISO dates."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, date):
        return value.isoformat()
    if value is None:
        return ""
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(cell) for cell in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for block in iter(lambda: handle.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def _series_defs(config: RunConfig) -> dict[str, dict[str, str]]:
    defs: dict[str, dict[str, str]] = {}
    for key, value in config.keys_with_prefix("series.").items():
        parts = key.split(".")
        if len(parts) != 3:
            raise ConfigError(f"bad series key {key!r}, expected series.<id>.<field>")
        _, sid, fieldname = parts
        defs.setdefault(sid, {})[fieldname] = value
    return defs


def parse_factor_specs(config: RunConfig) -> list[FactorSpec]:
    """Factor definitions from ``factor.<id>.*`` keys, in file order."""
    grouped: dict[str, dict[str, str]] = {}
    for key, value in config.keys_with_prefix("factor.").items():
        parts = key.split(".")
        if len(parts) != 3:
            raise ConfigError(f"bad factor key {key!r}, expected factor.<id>.<field>")
        _, fid, fieldname = parts
        grouped.setdefault(fid, {})[fieldname] = value
    specs = []
    for fid, fields in grouped.items():
        if "recipe" not in fields:
            raise ConfigError(f"factor {fid!r}: missing factor.{fid}.recipe")
        if "inputs" not in fields:
            raise ConfigError(f"factor {fid!r}: missing factor.{fid}.inputs")
        inputs = tuple(s.strip() for s in fields["inputs"].split(",") if s.strip())
        params = {k: v for k, v in fields.items() if k not in ("recipe", "inputs")}
        specs.append(FactorSpec(fid, fields["recipe"], inputs, params))
    if not specs:
        raise ConfigError("no factor.<id>.* definitions in config")
    return specs


@dataclass
class IngestResult:
    panel: AlignedPanel
    actions: list[AlignmentAction]
    rejected_rows: dict[str, list[int]]
    manifest: dict


def export_factor_csvs(panel: AlignedPanel, out_dir: Path) -> list[Path]:
    """One (date, value) CSV per built factor."""
    factor_dir = Path(out_dir) / "factors"
    factor_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for j, fid in enumerate(panel.factor_ids):
        path = factor_dir / f"{fid}.csv"
        write_csv(
            path,
            ["date", "value"],
            zip(panel.dates, panel.factor_matrix[:, j]),
        )
        paths.append(path)
    return paths


def ingest(config: RunConfig) -> IngestResult:
    """Load raw series, align calendars, build factors, and assemble the panel."""
    asset_ids = config.get_list("assets")
    if not asset_ids:
        raise ConfigError("config key 'assets' must list at least one series id")
    risk_free_id = config.require("risk_free")
    specs = parse_factor_specs(config)
    defs = _series_defs(config)

    needed = set(asset_ids) | {risk_free_id}
    for spec in specs:
        needed.update(i for i in spec.inputs if i != RISK_FREE_ID)
    missing = sorted(i for i in needed if i not in defs)
    if missing:
        raise ConfigError(f"no series.<id>.file definition for: {', '.join(missing)}")

    date_column = config.get("date_column", "date")
    delimiter = config.get("delimiter", ",")
    raw: list[RawSeries] = []
    rejected: dict[str, list[int]] = {}
    source_files: dict[str, str] = {}
    for sid in sorted(needed):
        fields = defs[sid]
        if "file" not in fields:
            raise ConfigError(f"series {sid!r}: missing series.{sid}.file")
        column = fields.get("column", sid)
        schema = CsvSchema(date_column=date_column, value_columns=(column,), delimiter=delimiter)
        series_list, bad_rows = load_csv(fields["file"], schema)
        series = series_list[0]
        try:
            scale = float(fields.get("scale", "1.0"))
        except ValueError:
            raise ConfigError(
                f"series.{sid}.scale must be a number, got {fields['scale']!r}"
            ) from None
        values = series.values * scale if scale != 1.0 else series.values
        raw.append(RawSeries(sid, series.dates, values, fields.get("units", "")))
        if bad_rows:
            rejected[sid] = bad_rows
        source_files[sid] = fields["file"]

    policy = CalendarPolicy(
        join_mode=config.get("join_mode", "intersection"),
        max_fill_gap=config.get_int("max_fill_gap", 5),
    )
    aligned, actions = align_calendars(raw, policy)
    by_id = {s.id: s for s in aligned}

    divisor = config.get_float("risk_free_divisor", DEFAULT_RISK_FREE_DIVISOR)
    if divisor <= 0:
        raise ConfigError("risk_free_divisor must be positive")
    rf_source = by_id[risk_free_id]
    risk_free = RawSeries(
        RISK_FREE_ID, rf_source.dates, rf_source.values / divisor, units="rate/period"
    )
    by_id[RISK_FREE_ID] = risk_free

    return_kind = config.get("return_kind", "log")
    asset_series = []
    for sid in asset_ids:
        rets = to_returns(by_id[sid], kind=return_kind)
        asset_series.append(
            RawSeries(sid, rets.dates, rets.values - risk_free.values[1:], units="excess")
        )

    factor_series = build_factors(specs, by_id, demean=config.get_bool("factors_demean", False))
    panel, final_actions = align(asset_series, factor_series, CalendarPolicy("intersection"))
    actions = actions + final_actions

    manifest = {
        "T": panel.n_periods,
        "n": panel.n_assets,
        "m": panel.n_factors,
        "asset_ids": list(panel.asset_ids),
        "factor_ids": list(panel.factor_ids),
        "first_date": panel.dates[0].isoformat(),
        "last_date": panel.dates[-1].isoformat(),
        "risk_free": risk_free_id,
        "risk_free_divisor": divisor,
        "return_kind": return_kind,
        "join_mode": policy.join_mode,
        "inputs": {
            sid: {"file": path, "sha256": sha256_file(Path(path))}
            for sid, path in sorted(source_files.items())
        },
        "rejected_rows": {k: v for k, v in sorted(rejected.items())},
    }
    return IngestResult(panel, actions, rejected, manifest)


def save_panel(panel: AlignedPanel, out_dir: Path, manifest: dict) -> tuple[Path, Path]:
    """Cache the panel as CSV plus a JSON manifest naming the column roles."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    panel_path = out_dir / "panel.csv"
    manifest_path = out_dir / "panel_manifest.json"
    header = ["date", *panel.asset_ids, *panel.factor_ids]
    rows = (
        [panel.dates[t], *panel.excess_returns[t], *panel.factor_matrix[t]]
        for t in range(panel.n_periods)
    )
    write_csv(panel_path, header, rows)
    write_json(manifest_path, manifest)
    return panel_path, manifest_path


def load_panel(panel_path: Path, manifest_path: Path | None = None) -> AlignedPanel:
    """Rebuild a cached panel; the manifest says which columns are assets."""
    panel_path = Path(panel_path)
    if not panel_path.exists():
        raise FileNotFoundError(f"cached panel not found: {panel_path} (run ingest first)")
    if manifest_path is None:
        manifest_path = panel_path.with_name("panel_manifest.json")
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise FileNotFoundError(f"panel manifest not found: {manifest_path}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    asset_ids = list(manifest["asset_ids"])
    factor_ids = list(manifest["factor_ids"])
    series_list, _ = load_csv(panel_path, CsvSchema(date_column="date"))
    by_id = {s.id: s for s in series_list}
    missing = [c for c in asset_ids + factor_ids if c not in by_id]
    if missing:
        raise ValueError(f"{panel_path}: columns missing vs manifest: {missing}")
    dates = series_list[0].dates
    returns = np.column_stack([by_id[c].values for c in asset_ids])
    factors = np.column_stack([by_id[c].values for c in factor_ids])
    return AlignedPanel(dates, returns, tuple(asset_ids), factors, tuple(factor_ids))


def write_alignment_report(path: Path, actions: list[AlignmentAction]) -> None:
    write_csv(path, ["date", "series", "action"], ((a.date, a.series, a.action) for a in actions))
