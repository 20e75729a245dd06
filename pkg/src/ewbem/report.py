"""Figure rendering for sweep outputs.

Every report figure is written next to the delimited output it
visualises; nothing is ever shown interactively (Agg backend).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402


def render_sweep_figures(result, out_dir) -> dict[str, Path]:
    """Per-probe time-history plots plus the iteration-count profile."""
    out_dir = Path(out_dir)
    written: dict[str, Path] = {}

    for name, series in result.histories.items():
        fig, ax = plt.subplots(figsize=(7.0, 3.2))
        ax.plot(result.times, series, lw=1.2)
        ax.set_xlabel("time [s]")
        ax.set_ylabel(name)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        path = out_dir / f"history_{name}.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written[f"figure_{name}"] = path

    ks = [s.k for s in result.stats]
    its = [s.iterations for s in result.stats]
    fig, ax = plt.subplots(figsize=(7.0, 3.2))
    ax.plot(ks, its, marker=".", lw=1.0)
    ax.set_xlabel("frequency index k")
    ax.set_ylabel("GMRES iterations")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path = out_dir / "iterations.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    written["figure_iterations"] = path
    return written


def render_comparison(times, series_map: dict[str, np.ndarray], ylabel: str,
                      path) -> Path:
    """Overlay several named time series (e.g. windowed vs analytic)."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7.0, 3.6))
    for label, series in series_map.items():
        ax.plot(times, series, lw=1.1, label=label)
    ax.set_xlabel("time [s]")
    ax.set_ylabel(ylabel)
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
