"""Matplotlib renderings for the report paths of the CLI.

All figures are written straight to files via the Agg backend, so plotting
works in headless environments.  Each helper takes already-computed results;
nothing here recomputes rates or runs trials.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .codec import CodecReport
from .regions import RateRegion


def _finish(fig, path: str):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_region(entries, path: str, title: str = "achievable rate frontier"):
    """Overlay the lower-left frontiers of one or more rate regions.

    `entries` is a sequence of (epsilon, RateRegion) pairs.  Each frontier is
    the polyline through the region's vertices plus the vertical/horizontal
    rays that close the up-right region.
    """
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    finite = [v for _, reg in entries for v in reg.vertices]
    if finite:
        r1_hi = max(max(v.r1 for v in finite) * 1.25, 0.5)
        r2_hi = max(max(v.r2 for v in finite) * 1.25, 0.5)
    else:
        r1_hi = r2_hi = 1.0
    for eps, reg in entries:
        label = f"eps = {eps:g}"
        if not reg.vertices:
            ax.plot([], [], label=f"{label} (empty)")
            continue
        vs = sorted(reg.vertices, key=lambda v: (v.r1, v.r2))
        xs = [vs[0].r1] + [v.r1 for v in vs] + [r1_hi]
        ys = [r2_hi] + [v.r2 for v in vs] + [vs[-1].r2]
        line, = ax.plot(xs, ys, drawstyle="default", label=label)
        ax.plot([v.r1 for v in vs], [v.r2 for v in vs], "o",
                color=line.get_color(), markersize=4)
    ax.set_xlabel("side-1 rate (bits/symbol)")
    ax.set_ylabel("side-2 rate (bits/symbol)")
    ax.set_title(title)
    ax.set_xlim(left=-0.02)
    ax.set_ylim(bottom=-0.02)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    _finish(fig, path)


def plot_rate_step(eps_values, rates, path: str,
                   title: str = "rate vs tolerance"):
    """Step plot of a single-encoder rate as a function of the tolerance."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    order = np.argsort(eps_values)
    e = np.asarray(eps_values, dtype=float)[order]
    r = np.asarray(rates, dtype=float)[order]
    ax.step(e, r, where="post")
    ax.plot(e, r, "o", markersize=4)
    ax.set_xlabel("tolerance eps")
    ax.set_ylabel("rate (bits/symbol)")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    _finish(fig, path)


def plot_codec_report(report: CodecReport, path: str):
    """Rates/probes and error frequencies across the simulated block counts."""
    rows = report.rows
    ns = [row["n"] for row in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.8))

    sides = (1,) if report.mode == "side_info" else (1, 2)
    for s in sides:
        ax1.plot(ns, [row[f"rate{s}_total"] for row in rows], "o-",
                 label=f"side {s} total rate")
        ax1.plot(ns, [row[f"rate{s}_layer1"] for row in rows], "s--",
                 label=f"side {s} layer-1 rate")
    ax1.set_xscale("log", base=2)
    ax1.set_xlabel("blocks n")
    ax1.set_ylabel("bits per source symbol")
    ax1.set_title("rates")
    ax1.grid(True, alpha=0.3)
    ax1.legend(fontsize=8)

    ax2.plot(ns, [row["max_symbol_err_freq"] for row in rows], "o-",
             label="max symbol error freq")
    ax2.plot(ns, [row[f"breach_freq{sides[0]}"] for row in rows], "s--",
             label="fallback budget breach freq")
    ax2.axhline(report.delta, color="gray", linestyle=":",
                label=f"delta = {report.delta:g}")
    ax2.set_xscale("log", base=2)
    ax2.set_xlabel("blocks n")
    ax2.set_ylabel("frequency")
    ax2.set_title("reliability")
    ax2.grid(True, alpha=0.3)
    ax2.legend(fontsize=8)
    _finish(fig, path)
