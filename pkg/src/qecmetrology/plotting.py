"""Log-log figures of sweep tables.  Matplotlib is imported lazily."""

from __future__ import annotations

import io
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = ["plot_sweep", "render_sweep_svg"]

SLOPE_GUIDES = ((-1.0, "N^-1"), (-0.5, "N^-1/2"), (-5.0 / 6.0, "N^-5/6"))


def _pyplot():
    import matplotlib

    matplotlib.use("svg", force=True)
    import matplotlib.pyplot as plt

    # fixed ids so identical data gives identical bytes
    matplotlib.rcParams["svg.hashsalt"] = "qecmetro"
    matplotlib.rcParams["svg.fonttype"] = "none"
    return plt


def render_sweep_svg(n: Sequence[float], series: dict[str, Sequence[float]], title: str = "") -> bytes:
    """SVG bytes of ``delta_lambda sqrt(T)`` against ``N`` with reference slopes.

    Non-positive entries are dropped per series.
    """
    plt = _pyplot()
    n = np.asarray(n, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    try:
        for label, ys in series.items():
            ys = np.asarray(ys, dtype=float)
            ok = (ys > 0) & np.isfinite(ys) & (n > 0)
            if ok.any():
                ax.loglog(n[ok], ys[ok], marker="o", ms=3, lw=1.2, label=label)
        if n.size > 1:
            x0, x1 = n.min(), n.max()
            anchor = None
            for ys in series.values():
                ys = np.asarray(ys, dtype=float)
                if ys.size and ys[0] > 0:
                    anchor = ys[0]
                    break
            if anchor is not None:
                xs = np.array([x0, x1])
                for slope, text in SLOPE_GUIDES:
                    ax.loglog(xs, anchor * (xs / x0) ** slope, ls=":", lw=0.8, color="0.5")
                    ax.annotate(text, (x1, anchor * (x1 / x0) ** slope), fontsize=7, color="0.4")
        ax.set_xlabel("N")
        ax.set_ylabel("delta lambda sqrt(T)")
        if title:
            ax.set_title(title)
        ax.grid(True, which="both", lw=0.3, alpha=0.5)
        ax.legend(fontsize=8)
        buf = io.BytesIO()
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    finally:
        plt.close(fig)
    return buf.getvalue()


def plot_sweep(rows, path: str | Path, title: str = "") -> Path:
    """Write the sweep figure for ``rows`` (``SweepRow`` objects) to ``path``."""
    n = [r.N for r in rows]
    series = {
        "encoded": [r.delta_lambda_sqrtT for r in rows],
        "classical": [r.baseline_classical for r in rows],
        "transversal ref": [r.baseline_transversal for r in rows],
    }
    data = render_sweep_svg(n, series, title)
    path = Path(path)
    path.write_bytes(data)
    return path
