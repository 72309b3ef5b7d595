"""Matplotlib figure rendering for sweep reports.

Figures are written next to the delimited reports: RD curves (PSNR and
SSIM over bpp), per-view PSNR standard deviation over bpp, and one
per-view PSNR heatmap per (strategy, qp) cell with the retained positions
outlined.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import RdCurve, RdPoint
from .sampling import SamplingMask

_MARKERS = "osD^vPX*"


def _curve_axes(ax, curves: dict[str, RdCurve], attr: str, ylabel: str) -> None:
    for i, (label, curve) in enumerate(sorted(curves.items())):
        xs = [p.bpp for p in curve.points]
        ys = [getattr(p, attr) for p in curve.points]
        ax.plot(xs, ys, marker=_MARKERS[i % len(_MARKERS)], markersize=4, label=label)
    ax.set_xlabel("bpp")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)


def save_rd_figure(path: str | Path, curves: dict[str, RdCurve], metric: str) -> Path:
    attr, ylabel = {
        "psnr": ("psnr_mean", "mean PSNR (dB)"),
        "ssim": ("ssim_mean", "mean SSIM"),
        "psnr_std": ("psnr_std", "per-view PSNR std (dB)"),
    }[metric]
    fig, ax = plt.subplots(figsize=(5.5, 4))
    _curve_axes(ax, curves, attr, ylabel)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def save_heatmap_figure(
    path: str | Path, point: RdPoint, strategy: str, mask: SamplingMask
) -> Path:
    """Per-view PSNR heatmap; retained (directly decoded) views are outlined."""
    grid = np.asarray(point.psnr_per_view, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(4.6, 4))
    im = ax.imshow(grid, cmap="viridis", origin="upper")
    fig.colorbar(im, ax=ax, label="PSNR (dB)")
    for r, c in np.argwhere(mask.retained):
        ax.add_patch(
            plt.Rectangle((c - 0.5, r - 0.5), 1, 1, fill=False, edgecolor="red", lw=1.0)
        )
    ax.set_title(f"{strategy} @ qp={point.qp}", fontsize=10)
    ax.set_xlabel("angular col")
    ax.set_ylabel("angular row")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def render_sweep_figures(result, out_dir: str | Path) -> dict[str, Path]:
    """All figures for one sweep result; returns name -> path."""
    from .pipeline import PipelineResult  # circular-import guard
    from .sampling import SamplingPattern, make_mask

    assert isinstance(result, PipelineResult)
    out = Path(out_dir)
    written: dict[str, Path] = {}
    if result.curves:
        written["fig_rd_psnr"] = save_rd_figure(out / "rd_psnr.png", result.curves, "psnr")
        written["fig_rd_ssim"] = save_rd_figure(out / "rd_ssim.png", result.curves, "ssim")
        written["fig_psnr_std"] = save_rd_figure(
            out / "psnr_std.png", result.curves, "psnr_std"
        )
    cfg = result.config
    for (strategy, qp), point in result.points.items():
        mask = make_mask(SamplingPattern.from_name(strategy), cfg.grid_rows, cfg.grid_cols)
        name = f"fig_heatmap_{strategy}_{qp}"
        written[name] = save_heatmap_figure(
            out / f"heatmap_{strategy}_{qp}.png", point, strategy, mask
        )
    return written
