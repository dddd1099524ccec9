"""Batch command-line interface: ingest, adf, estimate, roll, simulate."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import pipeline
from .config import ConfigError, RunConfig, load_config
from .fmb import first_pass, second_pass
from .grs import grs_statistic
from .rolling import plan_windows, roll
from .simkit import mc_experiment, random_spec
from .stationarity import adf_test


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to the key=value run configuration")
    common.add_argument("--out", help="output directory (default: out)")
    common.add_argument(
        "--set", dest="assignments", action="append", default=[], metavar="KEY=VALUE",
        help="override any config key; repeatable",
    )
    common.add_argument("--threads", type=int, help="worker cap for parallel stages")
    common.add_argument("--seed", type=int, help="seed for the simulate subcommand")
    common.add_argument("--no-plots", action="store_true", help="skip figure rendering")

    parser = argparse.ArgumentParser(
        prog="premiaroll",
        description="Rolling two-pass factor-model estimation and pricing tests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("ingest", parents=[common], help="build and cache the aligned panel")

    p_adf = sub.add_parser("adf", parents=[common], help="unit-root screening report")
    p_adf.add_argument("--panel", help="cached panel CSV (default: <out>/panel.csv)")

    p_est = sub.add_parser("estimate", parents=[common], help="full-sample premiums and test")
    p_est.add_argument("--panel", help="cached panel CSV (default: <out>/panel.csv)")

    p_roll = sub.add_parser("roll", parents=[common], help="rolling-window sweep")
    p_roll.add_argument("--panel", help="cached panel CSV (default: <out>/panel.csv)")
    p_roll.add_argument("--window", type=int, help="window width in observations")
    p_roll.add_argument("--step", type=int, help="window step (default 1)")

    p_sim = sub.add_parser("simulate", parents=[common], help="Monte Carlo oracle report")
    p_sim.add_argument("--reps", type=int, help="number of replications")

    return parser


def _merged_config(args: argparse.Namespace) -> RunConfig:
    overrides: dict[str, str] = {}
    for item in args.assignments:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    flag_map = {
        "out": getattr(args, "out", None),
        "threads": getattr(args, "threads", None),
        "seed": getattr(args, "seed", None),
        "panel": getattr(args, "panel", None),
        "window": getattr(args, "window", None),
        "step": getattr(args, "step", None),
        "sim_reps": getattr(args, "reps", None),
    }
    for key, value in flag_map.items():
        if value is not None:
            overrides[key] = str(value)
    if getattr(args, "no_plots", False):
        overrides["plots"] = "false"
    return load_config(args.config, environ=os.environ, overrides=overrides)


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.get("out", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _levels(config: RunConfig) -> list[float]:
    raw = config.get("levels", "0.05,0.10")
    try:
        levels = [float(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"config key 'levels' must be comma-separated numbers, got {raw!r}")
    for level in levels:
        if not 0.0 < level < 1.0:
            raise ConfigError(f"significance levels must lie inside (0, 1), got {level}")
    return levels


def _panel_path(config: RunConfig) -> Path:
    explicit = config.get("panel")
    if explicit:
        return Path(explicit)
    return Path(config.get("out", "out")) / "panel.csv"


def cmd_ingest(config: RunConfig) -> int:
    result = pipeline.ingest(config)
    out = _out_dir(config)
    panel_path, manifest_path = pipeline.save_panel(result.panel, out, result.manifest)
    report_path = out / "alignment_report.csv"
    pipeline.write_alignment_report(report_path, result.actions)
    panel = result.panel
    dropped = sum(1 for a in result.actions if a.action == "dropped")
    filled = sum(1 for a in result.actions if a.action == "filled")
    print(
        f"panel: T={panel.n_periods} n={panel.n_assets} m={panel.n_factors} "
        f"({panel.dates[0].isoformat()}..{panel.dates[-1].isoformat()})"
    )
    print(f"alignment: {dropped} dropped, {filled} filled -> {report_path}")
    for sid, rows in sorted(result.rejected_rows.items()):
        print(f"warning: {sid}: skipped rows with unparseable dates: {rows}", file=sys.stderr)
    factor_paths = pipeline.export_factor_csvs(panel, out)
    print(f"cached panel -> {panel_path}")
    print(f"manifest -> {manifest_path}")
    print(f"factor series -> {factor_paths[0].parent} ({len(factor_paths)} files)")
    return 0


def cmd_adf(config: RunConfig) -> int:
    panel = pipeline.load_panel(_panel_path(config))
    max_lag = config.get_int("adf_max_lag", -1)
    max_lag = None if max_lag < 0 else max_lag
    deterministic = config.get("adf_deterministic", "constant")
    rows = []
    columns = [(sid, panel.excess_returns[:, i]) for i, sid in enumerate(panel.asset_ids)]
    columns += [(fid, panel.factor_matrix[:, j]) for j, fid in enumerate(panel.factor_ids)]
    for sid, values in columns:
        res = adf_test(values, max_lag=max_lag, deterministic=deterministic)
        rows.append(
            (
                sid,
                res.chosen_lag,
                res.statistic,
                res.p_value_band,
                res.reject_at_1pct,
                res.reject_at_5pct,
                res.reject_at_10pct,
            )
        )
    out = _out_dir(config)
    path = out / "adf_report.csv"
    pipeline.write_csv(
        path,
        ["series", "chosen_lag", "statistic", "p_value_band",
         "reject_1pct", "reject_5pct", "reject_10pct"],
        rows,
    )
    rejected = sum(1 for r in rows if r[4])
    print(f"adf: {len(rows)} series screened, {rejected} reject the unit root at 1% -> {path}")
    return 0


def cmd_estimate(config: RunConfig) -> int:
    panel = pipeline.load_panel(_panel_path(config))
    fit = first_pass(panel)
    test = grs_statistic(fit, panel.n_periods)
    estimate = second_pass(fit, panel.excess_returns.mean(axis=0))
    out = _out_dir(config)
    prem_path = out / "premiums.csv"
    pipeline.write_csv(
        prem_path,
        ["factor", "lambda", "robust_se", "expected_premium"],
        (
            (fid, estimate.premia[j], estimate.robust_se[j], estimate.expected_premia[j])
            for j, fid in enumerate(panel.factor_ids)
        ),
    )
    grs_path = out / "grs.csv"
    pipeline.write_csv(
        grs_path,
        ["statistic", "df1", "df2", "p_value", "crit_5pct", "crit_10pct", "ridge_delta"],
        [(test.statistic, test.df1, test.df2, test.p_value,
          test.crit_5pct, test.crit_10pct, test.ridge_delta)],
    )
    print(f"grs: statistic={test.statistic:.4f} p={test.p_value:.4f} "
          f"df=({test.df1},{test.df2}) -> {grs_path}")
    print(f"premiums: {panel.n_factors} factors -> {prem_path}")
    if config.get_bool("plots", True):
        from . import plots

        fig_path = plots.save_premium_estimate_figure(
            panel.factor_ids, estimate.premia, estimate.robust_se,
            estimate.expected_premia, out / "premiums.png",
        )
        print(f"figure -> {fig_path}")
    return 0


def cmd_roll(config: RunConfig) -> int:
    panel = pipeline.load_panel(_panel_path(config))
    width = config.get_int("window", 500)
    step = config.get_int("step", 1)
    threads = config.get_int("threads", 1)
    min_sane = panel.n_assets + panel.n_factors + 31
    if width < min_sane:
        print(
            f"warning: window {width} is below n + m + 31 = {min_sane}; "
            "expect low-df flags", file=sys.stderr,
        )
    plan = plan_windows(panel.n_periods, width, step)
    series = roll(panel, plan, threads=threads)
    levels = _levels(config)
    out = _out_dir(config)

    grs_path = out / "rolling_grs.csv"
    pipeline.write_csv(
        grs_path,
        ["date", "grs_stat", "crit5", "crit10", "pval", "flags"],
        (
            (
                r.date,
                r.grs.statistic if r.grs else None,
                r.grs.crit_5pct if r.grs else None,
                r.grs.crit_10pct if r.grs else None,
                r.grs.p_value if r.grs else None,
                ";".join(r.flags),
            )
            for r in series.results
        ),
    )
    prem_path = out / "rolling_premiums.csv"

    def premium_rows():
        for r in series.results:
            for j, fid in enumerate(series.factor_ids):
                if r.premium is None:
                    yield (r.date, fid, None, None, None, None)
                else:
                    lam = r.premium.premia[j]
                    se = r.premium.robust_se[j]
                    yield (r.date, fid, lam, se, lam - 1.96 * se, lam + 1.96 * se)

    pipeline.write_csv(
        prem_path, ["date", "factor", "lambda", "se", "ci_lo", "ci_hi"], premium_rows()
    )
    if config.get_bool("emit_json", False):
        payload = {
            "factor_ids": list(series.factor_ids),
            "windows": [
                {
                    "date": r.date.isoformat(),
                    "grs_stat": r.grs.statistic if r.grs else None,
                    "pval": r.grs.p_value if r.grs else None,
                    "lambda": list(map(float, r.premium.premia)) if r.premium else None,
                    "se": list(map(float, r.premium.robust_se)) if r.premium else None,
                    "flags": list(r.flags),
                }
                for r in series.results
            ],
        }
        pipeline.write_json(out / "rolling.json", payload)
    pvals = series.grs_p_values()
    usable = np.isfinite(pvals)
    summary = ", ".join(
        f"{np.mean(pvals[usable] < level) if usable.any() else float('nan'):.3f} "
        f"rejected at {level:g}"
        for level in levels
    )
    print(f"roll: {len(series)} windows (width={width}, step={step}), "
          f"{series.n_failed} failed, {series.n_ridged} ridge-flagged")
    print(f"rejection fractions: {summary}")
    print(f"outputs -> {grs_path}, {prem_path}")
    if config.get_bool("plots", True):
        from . import plots

        g = plots.save_rolling_grs_figure(series, out / "rolling_grs.png")
        p = plots.save_rolling_premium_figure(series, out / "rolling_premiums.png")
        print(f"figures -> {g}, {p}")
    return 0


def cmd_simulate(config: RunConfig) -> int:
    spec = random_spec(
        n=config.get_int("sim_n", 33),
        m=config.get_int("sim_m", 9),
        T=config.get_int("sim_t", 6300),
        seed=config.get_int("seed", 0),
        alpha=config.get_float("sim_alpha", 0.0),
        innovations=config.get("sim_innovations", "gaussian"),
        t_dof=config.get_float("sim_t_dof", 5.0),
    )
    reps = config.get_int("sim_reps", 500)
    level = config.get_float("sim_level", 0.05)
    threads = config.get_int("threads", 1)
    result = mc_experiment(spec, reps=reps, test_level=level, threads=threads)
    out = _out_dir(config)
    path = out / "mc_report.csv"
    pipeline.write_csv(path, ["metric", "series", "value"], result.rows())
    print(
        f"simulate: n={spec.n} m={spec.m} T={spec.T} reps={reps} level={level:g}; "
        f"rejection_rate={result.rejection_rate:.4f}, failures={result.failures}"
    )
    print(f"report -> {path}")
    return 0


_COMMANDS = {
    "ingest": cmd_ingest,
    "adf": cmd_adf,
    "estimate": cmd_estimate,
    "roll": cmd_roll,
    "simulate": cmd_simulate,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _merged_config(args)
        return _COMMANDS[args.command](config)
    except (ConfigError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
