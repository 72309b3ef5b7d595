"""End-to-end sweep orchestration: strategies x QPs to RD curves and reports.

Each (strategy, qp) cell runs sub-sample -> encode -> decode -> reconstruct
-> evaluate.  Cells are independent jobs on a bounded worker pool; a failed
cell records its diagnostic and the sweep continues.  Also provides the
synthetic light field generators used as a desk-scale test corpus.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from .container import CodecConfig, encode_lightfield, decode_lightfield, rate_bits
from .core import LightField, load_lightfield
from .metrics import RdCurve, RdPoint, bd_metrics, evaluate
from .sampling import PATTERN_NAMES, SamplingPattern, apply_pattern, make_mask
from .synthesis import CORNERS_ORDERS, make_synthesizer, reconstruct

log = logging.getLogger(__name__)

DEFAULT_QPS = (20, 25, 30, 35, 40, 45)
SYNTHETIC_KINDS = ("ramp", "shifted-texture")


def _procedural_texture(height: int, width: int, seed: int) -> np.ndarray:
    """Seeded smooth full-contrast RGB texture (wraps cleanly when rolled)."""
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((height, width, 3))
    smooth = np.empty_like(noise)
    for ch in range(3):
        smooth[..., ch] = gaussian_filter(noise[..., ch], sigma=1.2, mode="wrap")
        lo, hi = smooth[..., ch].min(), smooth[..., ch].max()
        smooth[..., ch] = (smooth[..., ch] - lo) / (hi - lo) * 255.0
    return np.floor(smooth + 0.5).astype(np.uint8)


def gen_synthetic(
    kind: str,
    grid_rows: int,
    grid_cols: int,
    view_width: int,
    view_height: int,
    disparity: float = 0.0,
    seed: int = 0,
    row_step: int = 10,
    col_step: int = 5,
) -> LightField:
    """Synthetic light fields: "ramp" views are constants row_step*r + col_step*c;
    "shifted-texture" translates one seeded texture by disparity*(r, c) with
    wrap-around, emulating small or wide baselines."""
    if disparity < 0:
        raise ValueError(f"disparity must be nonnegative, got {disparity}")
    views = np.empty((grid_rows, grid_cols, view_height, view_width, 3), dtype=np.uint8)
    if kind == "ramp":
        for r in range(grid_rows):
            for c in range(grid_cols):
                value = min(255, max(0, row_step * r + col_step * c))
                views[r, c] = value
    elif kind == "shifted-texture":
        texture = _procedural_texture(view_height, view_width, seed)
        for r in range(grid_rows):
            for c in range(grid_cols):
                dy = round(disparity * r)
                dx = round(disparity * c)
                views[r, c] = np.roll(texture, (dy, dx), axis=(0, 1))
    else:
        raise ValueError(f"unknown synthetic kind {kind!r} (use {SYNTHETIC_KINDS})")
    return LightField(views)


@dataclass(frozen=True)
class PipelineConfig:
    """Resolved settings for one sweep; embedded in every report."""

    dataset_path: str | None = None
    naming_scheme: str = "linear"
    grid_rows: int = 9
    grid_cols: int = 9
    synthetic: dict | None = None
    strategies: tuple[str, ...] = PATTERN_NAMES
    qps: tuple[int, ...] = DEFAULT_QPS
    codec_backend: str = "internal"
    encode_template: str | None = None
    decode_template: str | None = None
    synthesizer: str = "bilinear"
    psnr_domain: str = "y"
    corners_order: str = "col_row"
    output_dir: str = "lfss-out"
    jobs: int = 1
    figures: bool = True

    def __post_init__(self) -> None:
        if not self.strategies:
            raise ValueError("strategy list is empty")
        if not self.qps:
            raise ValueError("qp list is empty")
        for name in self.strategies:
            SamplingPattern.from_name(name)
        for qp in self.qps:
            if not 0 <= qp <= 51:
                raise ValueError(f"qp {qp} out of range [0, 51]")
        if self.corners_order not in CORNERS_ORDERS:
            raise ValueError(f"corners_order must be one of {CORNERS_ORDERS}")
        if self.psnr_domain not in ("y", "rgb"):
            raise ValueError("psnr_domain must be 'y' or 'rgb'")
        if self.dataset_path is None and self.synthetic is None:
            raise ValueError("either dataset_path or synthetic source is required")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def codec_config(self, qp: int) -> CodecConfig:
        return CodecConfig(
            backend=self.codec_backend,
            qp=qp,
            external_encode_template=self.encode_template,
            external_decode_template=self.decode_template,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(data: dict) -> "PipelineConfig":
        data = dict(data)
        for key in ("strategies", "qps"):
            if key in data and data[key] is not None:
                data[key] = tuple(data[key])
        return PipelineConfig(**data)


@dataclass
class PipelineResult:
    config: PipelineConfig
    curves: dict[str, RdCurve] = field(default_factory=dict)
    points: dict[tuple[str, int], RdPoint] = field(default_factory=dict)
    errors: dict[tuple[str, int], str] = field(default_factory=dict)
    bd_rows: list[tuple[str, float, float]] = field(default_factory=list)
    bd_note: str | None = None


def load_source(cfg: PipelineConfig) -> LightField:
    if cfg.dataset_path is not None:
        return load_lightfield(cfg.dataset_path, cfg.naming_scheme, cfg.grid_rows, cfg.grid_cols)
    spec = dict(cfg.synthetic)
    kind = spec.pop("kind")
    return gen_synthetic(kind, cfg.grid_rows, cfg.grid_cols, **spec)


def run_cell(
    lf: LightField, strategy: str, qp: int, cfg: PipelineConfig
) -> RdPoint:
    """One sub-sample -> encode -> decode -> reconstruct -> evaluate cell."""
    pattern = SamplingPattern.from_name(strategy)
    synth = make_synthesizer(cfg.synthesizer)
    slf = apply_pattern(lf, pattern)
    enc = encode_lightfield(slf, cfg.codec_config(qp))
    dec = decode_lightfield(enc, cfg.codec_config(qp))
    rec = reconstruct(dec, synth, cfg.corners_order)
    return evaluate(rec, lf, rate_bits(enc), qp, cfg.psnr_domain)


def run_pipeline(cfg: PipelineConfig, lf: LightField | None = None) -> PipelineResult:
    """Run the full strategy x qp sweep and assemble curves plus BD rows."""
    if lf is None:
        lf = load_source(cfg)
    result = PipelineResult(config=cfg)
    cells = [(s, q) for s in cfg.strategies for q in cfg.qps]

    def job(cell):
        strategy, qp = cell
        return run_cell(lf, strategy, qp, cfg)

    with ThreadPoolExecutor(max_workers=min(cfg.jobs, len(cells))) as pool:
        for cell, outcome in zip(cells, pool.map(_guard(job), cells)):
            if isinstance(outcome, RdPoint):
                result.points[cell] = outcome
            else:
                result.errors[cell] = outcome
                log.warning("cell %s failed: %s", cell, outcome)

    for strategy in cfg.strategies:
        points = [result.points[c] for c in result.points if c[0] == strategy]
        if points:
            points.sort(key=lambda p: p.bpp)
            result.curves[strategy] = RdCurve(strategy, tuple(points))

    anchor = result.curves.get("full")
    contenders = [c for label, c in result.curves.items() if label != "full"]
    notes = []
    if anchor is None:
        notes.append("no 'full' anchor curve in sweep; BD table empty")
    elif not contenders:
        notes.append("no non-anchor strategies in sweep; BD table empty")
    else:
        for curve in contenders:
            try:
                bd = bd_metrics(curve, anchor)
                result.bd_rows.append((curve.label, bd.bd_psnr, bd.bd_rate))
            except ValueError as exc:
                notes.append(f"{curve.label}: {exc}")
    if notes:
        result.bd_note = "; ".join(notes)
    return result


def _guard(fn):
    def wrapped(cell):
        try:
            return fn(cell)
        except Exception as exc:  # per-cell failure isolation
            return f"{type(exc).__name__}: {exc}"

    return wrapped


def report_bd(
    curves: dict[str, RdCurve], anchor_label: str
) -> list[tuple[str, float, float]]:
    """BD-PSNR / BD-Rate of every given curve against the named anchor."""
    if anchor_label not in curves:
        raise ValueError(f"anchor curve {anchor_label!r} not present")
    anchor = curves[anchor_label]
    rows = []
    for label, curve in curves.items():
        bd = bd_metrics(curve, anchor)
        rows.append((label, bd.bd_psnr, bd.bd_rate))
    return rows


def write_reports(result: PipelineResult, output_dir: str | Path) -> dict[str, Path]:
    """Emit CSV/JSON reports (and figures when enabled) for a sweep result."""
    from . import plots, reports

    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    written: dict[str, Path] = {}

    written["config"] = reports.write_json(out / "config.json", cfg.to_dict())
    written["rd_curves"] = reports.write_rd_curves_csv(
        out / "rd_curves.csv", result.curves.values()
    )
    written["bd_table"] = reports.write_bd_table_csv(
        out / "bd_table.csv", result.bd_rows, note=result.bd_note
    )
    for (strategy, qp), point in result.points.items():
        mask = make_mask(SamplingPattern.from_name(strategy), cfg.grid_rows, cfg.grid_cols)
        path = out / f"heatmap_{strategy}_{qp}.json"
        reports.write_heatmap_json(path, strategy, point, mask, cfg.to_dict())
        written[f"heatmap_{strategy}_{qp}"] = path
    if result.errors:
        written["errors"] = reports.write_json(
            out / "errors.json",
            {f"{s}@qp{q}": msg for (s, q), msg in result.errors.items()},
        )
    if cfg.figures:
        written.update(plots.render_sweep_figures(result, out))
    return written
