"""Learning-curve and histogram figures (matplotlib Agg, saved as PPM + PNG)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .ppm import write_ppm

THEME_PLOT_COLORS = {
    "ancient": "#65431f",
    "industrial": "#585d63",
    "modern": "#5454de",
    "moorish": "#20488e",
    "future": "#a252fc",
}


def _save(fig, out_ppm: str | Path, out_png: str | Path | None) -> None:
    fig.canvas.draw()
    rgba = np.asarray(fig.canvas.buffer_rgba())
    write_ppm(out_ppm, np.ascontiguousarray(rgba[..., :3]))
    if out_png is not None:
        fig.savefig(out_png, dpi=fig.dpi)
    plt.close(fig)


def line_plot_with_bands(series: dict, ylabel: str, title: str,
                         out_ppm: str | Path,
                         out_png: str | Path | None = None) -> None:
    """One line per theme with a shaded deviation band."""
    fig, ax = plt.subplots(figsize=(7, 4.5), dpi=100)
    for theme, (x, mean, lo, hi) in series.items():
        color = THEME_PLOT_COLORS.get(theme, "#333333")
        ax.plot(x, mean, label=theme, color=color, linewidth=1.6)
        ax.fill_between(x, lo, hi, color=color, alpha=0.18, linewidth=0)
    ax.set_xlabel("update")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(loc="upper left", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, out_ppm, out_png)


def histogram_chart(counts: dict[str, np.ndarray], out_ppm: str | Path,
                    out_png: str | Path | None = None) -> None:
    """Grouped bars of termination floors for the two theme sets."""
    floors = np.arange(len(counts["training"]))
    width = 0.4
    fig, ax = plt.subplots(figsize=(7, 4.5), dpi=100)
    ax.bar(floors - width / 2, counts["training"], width,
           label="training themes", color="#3a7abf")
    ax.bar(floors + width / 2, counts["heldout"], width,
           label="held-out themes", color="#bf5a3a")
    ax.set_xlabel("terminal floor")
    ax.set_ylabel("episodes")
    ax.set_title("episode terminations by floor")
    ax.set_xticks(floors)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, out_ppm, out_png)
