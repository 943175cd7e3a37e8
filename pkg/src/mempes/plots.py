"""Figure rendering for run and sweep reports.

Every CLI report that writes a CSV can also render the matching figure
next to it.  Rendering is headless (Agg) and file-based.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_timeseries_figure",
    "save_sweep_figure",
    "save_compare_figure",
    "save_fit_figure",
]


def save_timeseries_figure(result, path, window=None):
    """Decoded target (faded) and learned output (solid) per dimension.

    ``window`` is a (start, stop) time pair; default is the test phase.
    """
    cfg = result.config
    if window is None:
        window = (cfg.learn_time, cfg.sim_time)
    sel = (result.t >= window[0]) & (result.t < window[1])
    t = result.t[sel]
    fig, ax = plt.subplots(figsize=(7, 3.2))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i in range(result.ref_series.shape[1]):
        c = colors[i % len(colors)]
        ax.plot(t, result.ref_series[sel, i], color=c, alpha=0.3, lw=2.5)
        ax.plot(t, result.est_series[sel, i], color=c, lw=1.0)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("decoded value")
    ax.set_ylim(-1.0, 1.0)
    ax.set_title(
        f"{cfg.rule}, {cfg.n_neurons} neurons, {cfg.function}: "
        f"MSE {result.metrics.mse:.4f}, rho {result.metrics.spearman_rho:.4f}"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_figure(rows, x_key, path, logx=False):
    """Mean MSE and Spearman rho against the swept parameter."""
    x = np.array([row[x_key] for row in rows])
    mse = np.array([row["mse"] for row in rows])
    rho = np.array([row["rho"] for row in rows])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.2))
    for ax, y, label in ((ax1, mse, "mean MSE"), (ax2, rho, "mean Spearman rho")):
        ax.plot(x, y, "o-", color="black", ms=4)
        ax.set_xlabel(x_key)
        ax.set_ylabel(label)
        if logx:
            ax.set_xscale("log")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_compare_figure(rows, path):
    """Grouped bars of mean MSE and rho per grid cell and rule."""
    cells = []
    for row in rows:
        label = (
            f"{row['neurons']}n {row['learn_signal'][:2]}-"
            f"{'id' if row['function'] == 'identity' else 'sq'}-{row['test_signal'][:2]}"
        )
        if label not in cells:
            cells.append(label)
    rules = ("pes", "mpes", "none")
    fig, axes = plt.subplots(2, 1, figsize=(max(6, 0.6 * len(cells) * len(rules)), 6))
    width = 0.8 / len(rules)
    xs = np.arange(len(cells))
    for ax, key in zip(axes, ("mse", "rho")):
        for ri, rule in enumerate(rules):
            vals = [row[key] for row in rows if row["rule"] == rule]
            ax.bar(xs + (ri - 1) * width, vals, width, label=rule)
        ax.set_xticks(xs)
        ax.set_xticklabels(cells, rotation=45, ha="right", fontsize=7)
        ax.set_ylabel(f"mean {key}")
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_fit_figure(pulse_series, params, path):
    """Measured pulse responses with the fitted law, plus the exponent line."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.2))
    exponents = []
    voltages = []
    for v, points in pulse_series:
        n = np.array([p[0] for p in points])
        r = np.array([p[1] for p in points])
        (line,) = ax1.plot(n, r, "o", ms=3, label=f"{v:g} V")
        grid = np.geomspace(n.min(), n.max(), 64)
        fit = params.r_zero + params.r_one * grid ** params.exponent(v)
        ax1.plot(grid, fit, "-", color=line.get_color(), lw=1)
        slope = np.polyfit(np.log(n), np.log(r - params.r_zero), 1)[0]
        voltages.append(v)
        exponents.append(slope)
    ax1.set_xscale("log")
    ax1.set_yscale("log")
    ax1.set_xlabel("pulse number")
    ax1.set_ylabel("resistance (ohm)")
    ax1.legend(fontsize=7)
    ax2.plot(voltages, exponents, "ko", ms=4)
    vgrid = np.linspace(min(voltages), max(voltages), 16)
    ax2.plot(vgrid, params.a + params.b * vgrid, "r-", lw=1)
    ax2.set_xlabel("pulse voltage (V)")
    ax2.set_ylabel("exponent")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
