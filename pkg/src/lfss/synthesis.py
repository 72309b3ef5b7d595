"""Reconstruction of missing views by cascaded one-axis interpolation.

Each sub-sampling pattern is inverted by a fixed plan of synthesis steps.
A 2x axis is filled in one step from neighbours at distance 1; a 4x axis
cascades two 2x steps (distance 2, then distance 1).  Corner patterns run
one column-wise cascade and one row-wise cascade; the default fills
columns first and the order is configurable.

Synthesizers expose a single capability: blend two aligned views at a
fractional position strictly between them.  The built-in baseline is a
pure pixel-domain bilinear blend; learned methods can be attached through
a subprocess contract without touching the plan machinery.
"""

from __future__ import annotations

import tempfile
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .core import LightField, ViewIndex
from .external import ExternalToolError, run_command
from .sampling import AxisKind, SampledLightField, SamplingPattern

CORNERS_ORDERS = ("col_row", "row_col")


def bilinear_synthesize(a: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
    """Per-pixel, per-channel (1-alpha)*a + alpha*b, rounded half away from zero."""
    if a.shape != b.shape:
        raise ValueError(f"view shapes differ: {a.shape} vs {b.shape}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    blend = (1.0 - alpha) * a.astype(np.float64) + alpha * b.astype(np.float64)
    return np.clip(np.floor(blend + 0.5), 0.0, 255.0).astype(np.uint8)


class Synthesizer(ABC):
    """One-axis view interpolator between two decoded neighbour views."""

    name: str = "abstract"

    @abstractmethod
    def synthesize(self, a: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
        """Return the view at fractional position alpha between a and b."""


class BilinearSynthesizer(Synthesizer):
    name = "bilinear"

    def synthesize(self, a: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
        return bilinear_synthesize(a, b, alpha)


class ExternalSynthesizer(Synthesizer):
    """Subprocess plug-in: two PNG views plus alpha in, one PNG view out.

    The command template uses {a}, {b}, {alpha}, {out} placeholders.
    """

    def __init__(self, template: str):
        self.template = template
        self.name = f"external:{template}"

    def synthesize(self, a: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
        if a.shape != b.shape:
            raise ValueError(f"view shapes differ: {a.shape} vs {b.shape}")
        with tempfile.TemporaryDirectory(prefix="lfss-synth-") as tmp:
            path_a, path_b = Path(tmp) / "a.png", Path(tmp) / "b.png"
            path_out = Path(tmp) / "out.png"
            Image.fromarray(np.asarray(a)).save(path_a)
            Image.fromarray(np.asarray(b)).save(path_b)
            run_command(self.template, a=path_a, b=path_b, alpha=alpha, out=path_out)
            if not path_out.is_file():
                raise ExternalToolError(f"synthesizer produced no output file: {path_out}")
            result = np.asarray(Image.open(path_out).convert("RGB"), dtype=np.uint8)
        if result.shape != a.shape:
            raise ExternalToolError(
                f"synthesizer output shape {result.shape} does not match input {a.shape}"
            )
        return result


def make_synthesizer(spec: str) -> Synthesizer:
    """Build a synthesizer from its config name: "bilinear" or "external:<template>"."""
    if spec == "bilinear":
        return BilinearSynthesizer()
    if spec.startswith("external:"):
        return ExternalSynthesizer(spec[len("external:"):])
    raise ValueError(f"unknown synthesizer {spec!r}")


@dataclass(frozen=True)
class SynthesisTask:
    target: ViewIndex
    source_a: ViewIndex
    source_b: ViewIndex
    alpha: float


@dataclass(frozen=True)
class SynthesisStep:
    axis: str  # "row" or "col": the angular axis along which the sources differ
    tasks: tuple[SynthesisTask, ...]


@dataclass(frozen=True)
class ReconstructionPlan:
    pattern: SamplingPattern
    grid_rows: int
    grid_cols: int
    steps: tuple[SynthesisStep, ...]

    @property
    def target_count(self) -> int:
        return sum(len(s.tasks) for s in self.steps)


def _stage_targets(n: int, factor: int) -> list[tuple[int, list[int]]]:
    """(source distance, missing indices) per 2x stage along one axis."""
    if factor == 2:
        return [(1, list(range(1, n, 2)))]
    return [
        (2, [i for i in range(n) if i % 4 == 2]),
        (1, list(range(1, n, 2))),
    ]


def _row_cascade(grid_rows: int, factor: int, cols: list[int]) -> list[SynthesisStep]:
    steps = []
    for dist, rows in _stage_targets(grid_rows, factor):
        tasks = tuple(
            SynthesisTask(ViewIndex(r, c), ViewIndex(r - dist, c), ViewIndex(r + dist, c), 0.5)
            for r in rows
            for c in cols
        )
        steps.append(SynthesisStep("row", tasks))
    return steps


def _col_cascade(grid_cols: int, factor: int, rows: list[int]) -> list[SynthesisStep]:
    steps = []
    for dist, cols in _stage_targets(grid_cols, factor):
        tasks = tuple(
            SynthesisTask(ViewIndex(r, c), ViewIndex(r, c - dist), ViewIndex(r, c + dist), 0.5)
            for r in rows
            for c in cols
        )
        steps.append(SynthesisStep("col", tasks))
    return steps


def build_plan(
    pattern: SamplingPattern,
    grid_rows: int,
    grid_cols: int,
    corners_order: str = "col_row",
) -> ReconstructionPlan:
    """Ordered synthesis steps that invert a sampling pattern."""
    if corners_order not in CORNERS_ORDERS:
        raise ValueError(f"corners_order must be one of {CORNERS_ORDERS}")
    k = pattern.factor
    kind = pattern.axis_kind
    all_rows = list(range(grid_rows))
    all_cols = list(range(grid_cols))
    if kind is not AxisKind.FULL:
        for n, name, used in (
            (grid_rows, "row", kind in (AxisKind.ROW, AxisKind.CORNERS)),
            (grid_cols, "col", kind in (AxisKind.COL, AxisKind.CORNERS)),
        ):
            if used and (n - 1) % k != 0:
                raise ValueError(f"grid {name} count {n} incompatible with factor {k}")

    if kind is AxisKind.FULL:
        steps: list[SynthesisStep] = []
    elif kind is AxisKind.ROW:
        steps = _row_cascade(grid_rows, k, all_cols)
    elif kind is AxisKind.COL:
        steps = _col_cascade(grid_cols, k, all_rows)
    elif corners_order == "col_row":
        retained_rows = list(range(0, grid_rows, k))
        steps = _col_cascade(grid_cols, k, retained_rows) + _row_cascade(grid_rows, k, all_cols)
    else:
        retained_cols = list(range(0, grid_cols, k))
        steps = _row_cascade(grid_rows, k, retained_cols) + _col_cascade(grid_cols, k, all_rows)
    return ReconstructionPlan(pattern, grid_rows, grid_cols, tuple(steps))


def reconstruct(
    slf: SampledLightField,
    synth: Synthesizer,
    corners_order: str = "col_row",
) -> LightField:
    """Fill every missing view by executing the pattern's plan in order."""
    plan = build_plan(slf.pattern, slf.grid_rows, slf.grid_cols, corners_order)
    views = np.zeros(
        (slf.grid_rows, slf.grid_cols, slf.view_height, slf.view_width, 3), dtype=np.uint8
    )
    filled = np.zeros((slf.grid_rows, slf.grid_cols), dtype=bool)
    for idx, view in slf.views.items():
        views[idx.row, idx.col] = view
        filled[idx.row, idx.col] = True
    for step in plan.steps:
        for task in step.tasks:
            if not (filled[task.source_a] and filled[task.source_b]):
                raise RuntimeError(f"plan reads unfilled source for target {tuple(task.target)}")
            views[task.target.row, task.target.col] = synth.synthesize(
                views[task.source_a.row, task.source_a.col],
                views[task.source_b.row, task.source_b.col],
                task.alpha,
            )
        for task in step.tasks:
            filled[task.target] = True
    if not filled.all():
        raise RuntimeError("plan does not cover the full grid")
    return LightField(views)
