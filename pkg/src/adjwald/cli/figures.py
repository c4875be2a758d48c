"""Optional matplotlib rendering of report figures next to the tables."""

from __future__ import annotations

from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, directory, name):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / name
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def wald_figure(rows, directory):
    """Dot plot of statistics per parameter, one marker series per family."""
    families = sorted({r["family"] for r in rows})
    params = sorted({r["parameter"] for r in rows})
    fig, ax = plt.subplots(figsize=(7, 0.6 * len(params) + 2))
    markers = "osd^v<>ph"
    for fi, fam in enumerate(families):
        xs, ys = [], []
        for pi, p in enumerate(params):
            for r in rows:
                if r["family"] == fam and r["parameter"] == p and r.get("statistic") is not None:
                    xs.append(r["statistic"])
                    ys.append(pi)
        ax.plot(xs, ys, markers[fi % len(markers)], label=fam, alpha=0.8)
    ax.set_yticks(range(len(params)))
    ax.set_yticklabels(params)
    ax.axvline(0.0, color="grey", lw=0.8)
    ax.set_xlabel("statistic")
    ax.legend(fontsize=8)
    return _save(fig, directory, "wald_statistics.png")


def ci_figure(curve_grid, curve_values, quantiles, interval, name, directory):
    """Interpolation view: statistic on the grid with quantile lines."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(curve_grid, curve_values, "-o", ms=3, color="grey")
    for q in quantiles:
        ax.axhline(q, ls=":", color="black", lw=0.8)
    for endpoint in interval:
        ax.axvline(endpoint, ls="--", color="tab:blue", lw=0.9)
    ax.set_xlabel(name)
    ax.set_ylabel("statistic")
    safe = name.replace("/", "_").replace(" ", "_").replace("(", "").replace(")", "").replace(":", "_").replace("*", "x")
    return _save(fig, directory, f"ci_{safe}.png")


def simulate_figure(rows, target, directory):
    fig, ax = plt.subplots(figsize=(7, 4))
    if target == "pvalue-distribution":
        families = sorted({r["family"] for r in rows})
        for fam in families:
            sub = [r for r in rows if r["family"] == fam]
            sub.sort(key=lambda r: r["bin_low"])
            centers = [0.5 * (r["bin_low"] + r["bin_high"]) for r in sub]
            dens = [r["estimate"] * len(sub) for r in sub]
            ax.plot(centers, dens, "-o", ms=3, label=fam)
        ax.axhline(1.0, color="grey", lw=0.8)
        ax.set_xlabel("p-value")
        ax.set_ylabel("density")
    else:
        keys = sorted({(r["family"], r["level"]) for r in rows})
        xs = np.arange(len(keys))
        vals = []
        errs = []
        for fam, level in keys:
            sub = [r for r in rows if r["family"] == fam and r["level"] == level]
            vals.append(np.mean([r["estimate"] for r in sub]))
            errs.append(np.mean([r["mc_se"] for r in sub]))
        ax.errorbar(xs, vals, yerr=errs, fmt="o")
        ax.set_xticks(xs)
        ax.set_xticklabels([f"{f}@{lv:g}" for f, lv in keys], rotation=45, ha="right")
        ax.set_ylabel(target)
    ax.legend(fontsize=8) if target == "pvalue-distribution" else None
    return _save(fig, directory, f"simulate_{target}.png")


def coverage_curve_figure(p_grid, curves, directory):
    """Exact coverage (and expected length) against the true proportion."""
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for label, (cov, length) in curves.items():
        axes[0].plot(p_grid, cov, label=label)
        axes[1].plot(p_grid, length, label=label)
    axes[0].set_xlabel("true proportion")
    axes[0].set_ylabel("exact coverage")
    axes[1].set_xlabel("true proportion")
    axes[1].set_ylabel("expected length")
    axes[0].legend(fontsize=8)
    return _save(fig, directory, "proportion_coverage.png")


def normality_gap_figure(zgrid, gaps, directory):
    """Quantile-gap diagnostic of exact null distributions."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, gap in gaps.items():
        ax.plot(zgrid, gap, label=label)
    ax.axhline(0.0, color="grey", lw=0.8)
    ax.set_xlabel("z")
    ax.set_ylabel("normal quantile gap")
    ax.legend(fontsize=8)
    return _save(fig, directory, "proportion_diagnostic.png")
