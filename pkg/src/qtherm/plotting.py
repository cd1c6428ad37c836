"""Figure rendering for the experiment runner.

Each report writer has a matching plot function that renders the same
results to a PNG next to the delimited output.  All figures use the Agg
backend so runs work headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finish(fig, out_path):
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_engine_sweep(points, mean_gap, out_path):
    """Per-cycle work and efficiency vs cold-bath bandwidth, with the
    leading-order predictions overlaid."""
    wb = np.array([p.config.wb for p in points])
    w = np.array([p.mean["w_tot"] for p in points])
    w_err = np.array([p.stderr["w_tot"] for p in points])
    eta = np.array([p.eta for p in points])
    eta_err = np.array([p.eta_err for p in points])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.errorbar(wb / mean_gap, w / mean_gap, yerr=w_err / mean_gap, fmt="o", ms=4)
    grid = np.linspace(0, wb.max(), 100)
    ax1.plot(grid / mean_gap, grid / mean_gap, "-", lw=1, label="W = Wb")
    ax1.set_xlabel(r"$W_b/\langle\delta\rangle$")
    ax1.set_ylabel(r"$\langle W_{tot}\rangle/\langle\delta\rangle$")
    ax1.legend(frameon=False)
    ax2.errorbar(wb / mean_gap, eta, yerr=eta_err, fmt="o", ms=4)
    ax2.plot(grid / mean_gap, 1 - grid / (2 * mean_gap), "-", lw=1,
             label=r"$1 - W_b/2\langle\delta\rangle$")
    ax2.set_xlabel(r"$W_b/\langle\delta\rangle$")
    ax2.set_ylabel(r"$\eta$")
    ax2.legend(frameon=False)
    return _finish(fig, out_path)


def plot_engine_diabatic(points, v_star, out_path):
    """Work output vs tuning speed; the first point is the adiabatic value."""
    adiabatic = points[0].mean["w_tot"]
    v = np.array([p.config.speed for p in points[1:]])
    w = np.array([p.mean["w_tot"] for p in points[1:]])
    err = np.array([p.stderr["w_tot"] for p in points[1:]])
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.errorbar(v, w, yerr=err, fmt="o", ms=4)
    ax.axhline(adiabatic, color="C1", lw=1, label="adiabatic")
    ax.axhline(0.5 * adiabatic, color="C1", lw=1, ls="--", label="half adiabatic")
    if v_star is not None:
        ax.axvline(v_star, color="0.5", lw=1, ls=":", label=r"$W_b^3/\delta_-$")
    ax.set_xscale("log")
    ax.set_xlabel("tuning speed v")
    ax.set_ylabel(r"$\langle W_{tot}\rangle$")
    ax.legend(frameon=False, fontsize=8)
    return _finish(fig, out_path)


def plot_gapstats(rows, out_path):
    """Histogram of normalized gaps pooled per disorder strength, with the
    Poisson and level-repulsion reference densities."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6), sharey=True)
    strengths = sorted({r["h"] for r in rows})
    s_grid = np.linspace(0, 4, 200)
    for ax, h in zip(axes, strengths):
        gaps = np.concatenate([r["gaps"] for r in rows if r["h"] == h])
        ax.hist(gaps, bins=40, range=(0, 4), density=True, alpha=0.6)
        ax.plot(s_grid, np.exp(-s_grid), label="Poisson")
        ax.plot(
            s_grid,
            np.pi / 2 * s_grid * np.exp(-np.pi * s_grid**2 / 4),
            label="GOE",
        )
        ax.set_title(f"h = {h:g}")
        ax.set_xlabel(r"$\delta/\langle\delta\rangle$")
        ax.legend(frameon=False, fontsize=8)
    axes[0].set_ylabel("density")
    return _finish(fig, out_path)


def plot_otoc(times, f_values, tables, out_path):
    """Re/Im of F(t) and the sixteen coarse quasiprobability trajectories."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 3.6))
    f_values = np.asarray(f_values)
    ax1.plot(times, f_values.real, label="Re F")
    ax1.plot(times, f_values.imag, label="Im F", ls="--")
    ax1.set_xlabel("t")
    ax1.set_ylabel("F(t)")
    ax1.legend(frameon=False)
    keys = list(tables[0].values.keys())
    for key in keys:
        ax2.plot(times, [tab[key].real for tab in tables], lw=0.8)
    ax2.set_xlabel("t")
    ax2.set_ylabel(r"Re $\tilde{A}$")
    return _finish(fig, out_path)


def plot_brownian(result, out_path):
    """Ensemble-averaged OTOC and table entries with late-time targets."""
    ts = [p.t for p in result.points]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 3.6))
    ax1.errorbar(
        ts,
        [p.f_mean.real for p in result.points],
        yerr=[p.f_err for p in result.points],
        fmt="o-",
        ms=3,
        label=r"$\mathfrak{F}$",
    )
    ax1.errorbar(
        ts,
        [p.g_mean.real for p in result.points],
        yerr=[p.g_err for p in result.points],
        fmt="s-",
        ms=3,
        label=r"$\mathfrak{G}$",
    )
    ax1.set_xlabel("t")
    ax1.legend(frameon=False)
    keys = list(result.points[0].table_mean.keys())
    for key in keys:
        ax2.plot(ts, [p.table_mean[key].real for p in result.points], lw=0.8)
    for target in (3 / 16, 1 / 16, -1 / 16):
        ax2.axhline(target, color="0.8", lw=0.6, zorder=0)
    ax2.set_xlabel("t")
    ax2.set_ylabel(r"$\mathfrak{A}$")
    return _finish(fig, out_path)


def plot_nats_audit(rows, out_path):
    """Per-copy relative entropy and trace distance vs copy count."""
    ns = [r["n"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.plot(ns, [r["mean_d"] for r in rows], "o-", label=r"mean $D(\Omega_\ell\|\gamma)$")
    ax.plot(ns, [r["max_dist"] for r in rows], "s--", label=r"max $\|\cdot\|_1$")
    ax.set_xlabel("copies N")
    ax.legend(frameon=False)
    return _finish(fig, out_path)
