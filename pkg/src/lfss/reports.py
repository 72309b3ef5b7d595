"""CSV and JSON report emission and parsing.

Floats are written with repr precision so a parsed CSV reproduces the
exact RdCurve values that were emitted.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable

import numpy as np

from .metrics import RdCurve, RdPoint
from .sampling import SamplingMask

RD_COLUMNS = ("strategy", "qp", "bpp", "psnr_mean", "psnr_std", "ssim_mean")
BD_COLUMNS = ("strategy", "bd_psnr_db", "bd_rate_percent")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"cannot serialize {type(obj)}")


def write_json(path: str | Path, payload) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=_jsonable)
        fh.write("\n")
    return path


def write_rd_curves_csv(path: str | Path, curves: Iterable[RdCurve]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RD_COLUMNS)
        for curve in curves:
            for p in curve.points:
                writer.writerow(
                    [curve.label, p.qp, repr(p.bpp), repr(p.psnr_mean),
                     repr(p.psnr_std), repr(p.ssim_mean)]
                )
    return path


def read_rd_curves_csv(path: str | Path) -> dict[str, RdCurve]:
    """Parse a curves CSV back into RdCurves (without per-view grids)."""
    by_label: dict[str, list[RdPoint]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(RD_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"curves CSV missing columns: {sorted(missing)}")
        for row in reader:
            point = RdPoint(
                qp=int(row["qp"]),
                bpp=float(row["bpp"]),
                psnr_mean=float(row["psnr_mean"]),
                psnr_std=float(row["psnr_std"]),
                ssim_mean=float(row["ssim_mean"]),
            )
            by_label.setdefault(row["strategy"], []).append(point)
    return {
        label: RdCurve(label, tuple(sorted(points, key=lambda p: p.bpp)))
        for label, points in by_label.items()
    }


def write_bd_table_csv(
    path: str | Path,
    rows: Iterable[tuple[str, float, float]],
    note: str | None = None,
) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BD_COLUMNS)
        for label, bd_psnr, bd_rate in rows:
            writer.writerow([label, repr(bd_psnr), repr(bd_rate)])
        if note:
            writer.writerow(["# note", note, ""])
    return path


def format_bd_table(rows: Iterable[tuple[str, float, float]], anchor_label: str) -> str:
    """Aligned text table of BD scores against the anchor."""
    lines = [f"{'strategy':<12} {'BD-PSNR (dB)':>14} {'BD-Rate (%)':>14}   vs {anchor_label}"]
    lines.append("-" * len(lines[0]))
    for label, bd_psnr, bd_rate in rows:
        lines.append(f"{label:<12} {bd_psnr:>14.3f} {bd_rate:>14.1f}")
    return "\n".join(lines)


def write_heatmap_json(
    path: str | Path,
    strategy: str,
    point: RdPoint,
    mask: SamplingMask,
    config: dict | None = None,
) -> Path:
    payload = {
        "strategy": strategy,
        "qp": point.qp,
        "bpp": point.bpp,
        "psnr_mean": point.psnr_mean,
        "psnr_std": point.psnr_std,
        "ssim_mean": point.ssim_mean,
        "grid_rows": mask.grid_rows,
        "grid_cols": mask.grid_cols,
        "retained": mask.retained,
        "psnr_per_view": point.psnr_per_view,
        "ssim_per_view": point.ssim_per_view,
        "config": config,
    }
    return write_json(path, payload)


def write_rd_point_json(path: str | Path, point: RdPoint, extra: dict | None = None) -> Path:
    payload = {
        "qp": point.qp,
        "bpp": point.bpp,
        "psnr_mean": point.psnr_mean,
        "psnr_std": point.psnr_std,
        "ssim_mean": point.ssim_mean,
        "psnr_per_view": point.psnr_per_view,
        "ssim_per_view": point.ssim_per_view,
    }
    if extra:
        payload.update(extra)
    return write_json(path, payload)
