"""PNG figures for experiment and sweep outputs.

Only used when a command is given ``--plot``.  Everything renders through
the Agg backend so no display is needed.
"""
from __future__ import annotations

import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _save(fig, path) -> None:
    fig.savefig(path, dpi=120, bbox_inches="tight", metadata={"Software": None})


def plot_percent_change(changes: dict, levels, path, metric: str = "vamp") -> None:
    """Heatmap of percent change from level 0, one row per corruption kind."""
    plt = _pyplot()
    kinds = list(changes)
    data = np.array([[np.nan if v is None else v for v in changes[k][metric]] for k in kinds],
                    dtype=float)
    lim = max(1.0, float(np.nanmax(np.abs(data)))) if np.isfinite(data).any() else 1.0
    fig, ax = plt.subplots(figsize=(1.2 * len(levels) + 2, 0.6 * len(kinds) + 1.5))
    im = ax.imshow(data, cmap="RdBu", vmin=-lim, vmax=lim, aspect="auto")
    ax.set_xticks(range(len(levels)), [str(lv) for lv in levels])
    ax.set_yticks(range(len(kinds)), [k.replace("_", " ") for k in kinds])
    ax.set_xlabel("severity level")
    for i in range(data.shape[0]):
        for j in range(data.shape[1]):
            if np.isfinite(data[i, j]):
                ax.text(j, i, f"{data[i, j]:.1f}", ha="center", va="center", fontsize=8)
    fig.colorbar(im, ax=ax, label=f"{metric} change (%)")
    _save(fig, path)
    plt.close(fig)


def plot_alpha_heatmaps(alpha_by_level: dict, alphas, levels, path) -> None:
    """One alpha x level panel of VAMP per corruption kind."""
    plt = _pyplot()
    kinds = list(alpha_by_level)
    fig, axes = plt.subplots(1, len(kinds), figsize=(3.2 * len(kinds), 3.2), squeeze=False)
    for ax, k in zip(axes[0], kinds):
        im = ax.imshow(np.asarray(alpha_by_level[k], dtype=float), cmap="viridis",
                       vmin=0.0, vmax=1.0, origin="lower", aspect="auto")
        ax.set_title(k.replace("_", " "), fontsize=9)
        ax.set_xticks(range(len(levels)), [str(lv) for lv in levels])
        ax.set_yticks(range(len(alphas)), [f"{a:g}" for a in alphas])
        ax.set_xlabel("level")
    axes[0][0].set_ylabel("alpha")
    fig.colorbar(im, ax=axes[0].tolist(), label="VAMP")
    _save(fig, path)
    plt.close(fig)


def plot_sweep(table, path) -> None:
    plt = _pyplot()
    a, v = zip(*table)
    fig, ax = plt.subplots(figsize=(4, 3))
    ax.plot(a, v, marker="o")
    ax.set_xlabel("alpha (appearance weight)")
    ax.set_ylabel("VAMP")
    ax.set_xlim(0, 1)
    ax.grid(alpha=0.3)
    _save(fig, path)
    plt.close(fig)
