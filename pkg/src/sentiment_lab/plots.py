"""SVG figures: correlation/p-value heatmaps, signal plots and trade-off curves.

Text stays as ``<text>`` elements and ids are salted with a fixed string so
the same layer always renders to the same bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import Normalize, TwoSlopeNorm  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from .errors import ComputationError  # noqa: E402

PALETTES = ("diverging_corr", "pvalue_mask")
_RC = {"svg.hashsalt": "sentiment-lab", "svg.fonttype": "none", "font.size": 7}


def heatmap_colors(layer, palette: str = "diverging_corr", alpha: float = 0.01) -> np.ndarray:
    """RGBA per cell as drawn by :func:`render_heatmap`; undefined cells are fully transparent.

    ``diverging_corr``: red for positive, blue for negative, white at zero.
    ``pvalue_mask``: white below ``alpha``, grey scale (darker = larger p) otherwise.
    """
    layer = np.asarray(layer, dtype=float)
    undefined = np.isnan(layer)
    if palette == "diverging_corr":
        finite = layer[~undefined]
        lim = float(np.max(np.abs(finite))) if finite.size else 1.0
        lim = lim or 1.0
        norm = TwoSlopeNorm(vcenter=0.0, vmin=-lim, vmax=lim)
        rgba = plt.get_cmap("RdBu_r")(norm(np.nan_to_num(layer)))
    elif palette == "pvalue_mask":
        grey = plt.get_cmap("Greys")(Normalize(vmin=alpha, vmax=1.0, clip=True)(np.nan_to_num(layer, nan=1.0)) * 0.8 + 0.1)
        rgba = np.where((np.nan_to_num(layer, nan=1.0) < alpha)[..., None], np.array([1.0, 1.0, 1.0, 1.0]), grey)
    else:
        raise ValueError(f"palette must be one of {PALETTES}")
    rgba = np.array(rgba, dtype=float)
    rgba[undefined] = (0.0, 0.0, 0.0, 0.0)
    return rgba


def render_heatmap(layer, row_labels, col_labels, path, palette: str = "diverging_corr", alpha: float = 0.01,
                   title: str = "") -> Path:
    layer = np.asarray(layer, dtype=float)
    if layer.size == 0:
        raise ComputationError("cannot render an empty layer")
    colors = heatmap_colors(layer, palette, alpha)
    rows, cols = layer.shape
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(7, 6))
        for i in range(rows):
            for j in range(cols):
                if np.isnan(layer[i, j]):
                    ax.add_patch(Rectangle((j - 0.5, i - 0.5), 1, 1, fill=False, hatch="///",
                                           edgecolor="0.6", linewidth=0))
        mesh = ax.pcolormesh(np.arange(cols + 1) - 0.5, np.arange(rows + 1) - 0.5, np.zeros((rows, cols)),
                             shading="flat", linewidth=0)
        mesh.set_array(None)
        mesh.set_facecolor(colors.reshape(-1, 4))
        ax.set_xlim(-0.5, cols - 0.5)
        ax.set_ylim(rows - 0.5, -0.5)
        step_c = max(1, cols // 12)
        step_r = max(1, rows // 12)
        ax.set_xticks(range(0, cols, step_c), [col_labels[j] for j in range(0, cols, step_c)], rotation=90)
        ax.set_yticks(range(0, rows, step_r), [row_labels[i] for i in range(0, rows, step_r)])
        if palette == "diverging_corr":
            finite = layer[~np.isnan(layer)]
            lim = float(np.max(np.abs(finite))) if finite.size else 1.0
            sm = plt.cm.ScalarMappable(TwoSlopeNorm(0.0, -(lim or 1.0), lim or 1.0), plt.get_cmap("RdBu_r"))
            fig.colorbar(sm, ax=ax)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path


def render_signal_plot(dates, values, path, title: str = "") -> Path:
    """Line plot over dates; NaN (no-signal) values break the line."""
    values = np.asarray(values, dtype=float)
    if values.size == 0 or np.all(np.isnan(values)):
        raise ComputationError("nothing to plot: series is empty after filtering")
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(8, 2.5))
        ax.plot(np.array(dates, dtype="datetime64[D]"), values, linewidth=0.6)
        ax.axhline(0.0, color="0.5", linewidth=0.4)
        ax.set_ylim(-1.05, 1.05)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path


def render_tradeoff(depths, means, horizons, path, title: str = "") -> Path:
    means = np.asarray(means, dtype=float)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        for k, h in enumerate(horizons):
            ax.plot(depths, means[:, k], linewidth=0.8, label=f"{h} m")
        ax.set_xlabel("cumulative depth d")
        ax.set_ylabel("mean correlation")
        ax.legend(ncol=3, fontsize=6)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
