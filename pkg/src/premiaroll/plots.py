"""Matplotlib rendering of the report figures, written next to the CSV output."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150


def save_rolling_grs_figure(series, path: Path) -> Path:
    """Rolling pricing-test statistic with its 5% and 10% critical values."""
    dates = list(series.dates)
    stats = series.grs_stats()
    crit5 = np.array([r.grs.crit_5pct if r.grs else np.nan for r in series.results])
    crit10 = np.array([r.grs.crit_10pct if r.grs else np.nan for r in series.results])
    fig, ax = plt.subplots(figsize=(10, 4))
    ax.plot(dates, stats, color="black", lw=0.9, label="statistic")
    ax.plot(dates, crit5, color="red", lw=0.9, ls="--", label="5% critical value")
    ax.plot(dates, crit10, color="blue", lw=0.9, ls="--", label="10% critical value")
    ax.set_ylabel("test statistic")
    ax.set_title("Rolling pricing-test statistic")
    ax.legend(loc="upper left", fontsize=8)
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return Path(path)


def save_rolling_premium_figure(series, path: Path) -> Path:
    """Per-factor rolling premium estimates with 95% confidence bands."""
    dates = list(series.dates)
    premia = series.premium_matrix()
    lo, hi = series.ci_95
    m = len(series.factor_ids)
    ncols = min(3, m)
    nrows = math.ceil(m / ncols)
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(4.0 * ncols, 2.6 * nrows), sharex=True, squeeze=False
    )
    for j, fid in enumerate(series.factor_ids):
        ax = axes[j // ncols][j % ncols]
        ax.fill_between(dates, lo[:, j], hi[:, j], color="tab:red", alpha=0.20, lw=0)
        ax.plot(dates, premia[:, j], color="black", lw=0.8)
        ax.axhline(0.0, color="gray", lw=0.5)
        ax.set_title(fid, fontsize=9)
        ax.tick_params(labelsize=7)
    for j in range(m, nrows * ncols):
        axes[j // ncols][j % ncols].set_visible(False)
    fig.suptitle("Rolling premium estimates (95% bands)", fontsize=11)
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return Path(path)


def save_premium_estimate_figure(factor_ids, premia, robust_se, expected, path: Path) -> Path:
    """Full-sample premium estimates with error bars and the sample-mean benchmark."""
    x = np.arange(len(factor_ids))
    fig, ax = plt.subplots(figsize=(max(5.0, 0.8 * len(factor_ids)), 3.5))
    ax.errorbar(
        x, premia, yerr=1.96 * np.asarray(robust_se), fmt="o", color="black",
        capsize=3, label="estimate (95% bars)",
    )
    ax.scatter(x, expected, marker="x", color="tab:red", label="sample-mean benchmark")
    ax.axhline(0.0, color="gray", lw=0.5)
    ax.set_xticks(x)
    ax.set_xticklabels(factor_ids, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("premium per period")
    ax.set_title("Full-sample premium estimates")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return Path(path)
