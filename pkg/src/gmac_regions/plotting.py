"""Deterministic SVG figures (matplotlib, Agg backend)."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {
    "svg.hashsalt": "gmac-regions",   # fixed element ids
    "svg.fonttype": "none",           # text stays text; no embedded glyph paths
    "font.family": "DejaVu Sans",
    "axes.grid": True,
    "grid.alpha": 0.3,
}
_STYLES = ("-", "--", "-.", ":")


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None, "Format": None, "Type": None})
    plt.close(fig)
    return path


def plot_regions(path: str | Path, title: str,
                 curves: Sequence[tuple[str, np.ndarray]]) -> Path:
    """One closed boundary per curve: axis intercepts joined through the Pareto vertices."""
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.5, 4.5))
        for i, (label, verts) in enumerate(curves):
            v = np.asarray(verts, dtype=float).reshape(-1, 2)
            ax.plot(v[:, 0], v[:, 1], linestyle=_STYLES[i % len(_STYLES)],
                    linewidth=1.6, label=label)
        ax.set_xlabel("R1 [bits/channel use]")
        ax.set_ylabel("R2 [bits/channel use]")
        ax.set_xlim(left=0)
        ax.set_ylim(bottom=0)
        ax.set_title(title)
        ax.legend(loc="upper right", fontsize=8)
        fig.tight_layout()
        return _save(fig, Path(path))


def plot_lines(path: str | Path, title: str, x: Sequence[float],
               series: Mapping[str, Sequence[float]], xlabel: str, ylabel: str) -> Path:
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.5, 4.0))
        for i, (label, y) in enumerate(series.items()):
            ax.plot(x, y, linestyle=_STYLES[i % len(_STYLES)], marker="o", markersize=3,
                    linewidth=1.4, label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.legend(fontsize=8)
        fig.tight_layout()
        return _save(fig, Path(path))
