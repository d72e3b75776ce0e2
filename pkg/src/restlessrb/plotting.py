"""Figure rendering for the command-line reports.

Each helper writes one PNG next to the delimited data it visualizes.  The
Agg backend is forced so rendering works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150


def save_landscape_figure(path, a_g, a_d, epsilon, argmin_ag, argmin_ad, mode, n_cliffords):
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    mesh = ax.pcolormesh(a_g, a_d, np.asarray(epsilon).T, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="error fraction")
    ax.plot([argmin_ag], [argmin_ad], "wo", mec="k", ms=7, label="minimum")
    ax.set_xlabel("gaussian amplitude")
    ax.set_ylabel("derivative amplitude")
    ax.set_title(f"{mode} cost, {n_cliffords} Cliffords")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_rb_figure(path, n_cl, epsilon, err, fit, mode):
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.errorbar(n_cl, epsilon, yerr=err, fmt="o", ms=4, capsize=2, label="simulated")
    if fit is not None:
        grid = np.linspace(min(n_cl), max(n_cl), 200)
        ax.plot(grid, 1.0 - (fit.a * fit.p_cl**grid + fit.b), "-", lw=1,
                label=f"fit F={fit.f_cl:.5f}")
    ax.set_xlabel("number of Cliffords")
    ax.set_ylabel("error fraction")
    ax.set_title(f"{mode} benchmarking decay")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_snr_figure(path, table):
    """``table``: list of dict rows with f_a, n_cl, model/mc signal, noise, snr."""
    fig, axes = plt.subplots(1, 3, figsize=(10.5, 3.2), sharex=True)
    f_values = sorted({row["f_a"] for row in table})
    for f_a in f_values:
        rows = [r for r in table if r["f_a"] == f_a]
        n = [r["n_cl"] for r in rows]
        for ax, key in zip(axes, ("signal", "noise", "snr")):
            ax.plot(n, [r[f"model_{key}"] for r in rows], "-", lw=1, label=f"model F={f_a}")
            if rows[0].get(f"mc_{key}") is not None:
                ax.plot(n, [r[f"mc_{key}"] for r in rows], "o", ms=3, label=f"MC F={f_a}")
    for ax, title in zip(axes, ("signal", "noise", "SNR")):
        ax.set_xscale("log")
        ax.set_xlabel("number of Cliffords")
        ax.set_title(title)
    axes[0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_psd_figure(path, frequencies, psd, fit_alpha, fit_beta):
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.loglog(frequencies, psd, "o", ms=3, label="estimate")
    if fit_alpha is not None:
        grid = np.asarray(frequencies, dtype=float)
        ax.loglog(grid, fit_alpha * grid**fit_beta, "-", lw=1,
                  label=f"fit: beta={fit_beta:.2f}")
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel("PSD (s$^2$/Hz)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_tuneup_figure(path, trajectory, step_boundaries):
    fig, ax = plt.subplots(figsize=(5.6, 3.4))
    iterations = [row["iteration"] for row in trajectory]
    costs = [row["epsilon"] for row in trajectory]
    ax.plot(iterations, costs, ".", ms=3)
    for boundary in step_boundaries:
        ax.axvline(boundary, color="k", lw=0.8, ls="--")
    ax.set_xlabel("cost evaluation")
    ax.set_ylabel("error fraction")
    ax.set_title("two-step tuneup trajectory")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_timing_figure(path, rows):
    """Stacked per-iteration time budget, one bar per pipeline/mode row."""
    labels = [f"{r['pipeline']}\n{r['mode']}" for r in rows]
    parts = ("set_parameters_s", "acquisition_s", "processing_s", "miscellaneous_s")
    fig, ax = plt.subplots(figsize=(5.6, 3.4))
    bottom = np.zeros(len(rows))
    for part in parts:
        heights = np.array([r[part] for r in rows])
        ax.bar(labels, heights, bottom=bottom, label=part.replace("_s", "").replace("_", " "))
        bottom += heights
    ax.set_ylabel("time per iteration (s)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
