"""View sub-sampling patterns, masks, and the snake scan order.

Six patterns plus the identity "full" anchor are supported.  Retained
angular indices are those divisible by the factor, so index 0 and the last
index are always kept on a sub-sampled axis and reconstruction only ever
interpolates between two decoded neighbours.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import LightField, ViewIndex


class AxisKind(Enum):
    FULL = "full"
    ROW = "row"
    COL = "col"
    CORNERS = "corners"


@dataclass(frozen=True)
class SamplingPattern:
    """One of the seven strategies: full, row/col/corners at factor 2 or 4."""

    axis_kind: AxisKind
    factor: int

    def __post_init__(self) -> None:
        if self.axis_kind is AxisKind.FULL:
            if self.factor != 1:
                raise ValueError("full pattern requires factor 1")
        elif self.factor not in (2, 4):
            raise ValueError(f"{self.axis_kind.value} pattern requires factor 2 or 4")

    @property
    def name(self) -> str:
        if self.axis_kind is AxisKind.FULL:
            return "full"
        return f"{self.axis_kind.value}_{self.factor}x"

    @staticmethod
    def from_name(name: str) -> "SamplingPattern":
        if name == "full":
            return SamplingPattern(AxisKind.FULL, 1)
        try:
            kind, fac = name.rsplit("_", 1)
            return SamplingPattern(AxisKind(kind), int(fac.rstrip("x")))
        except (ValueError, KeyError):
            raise ValueError(f"unknown sampling pattern {name!r}") from None


PATTERN_NAMES = (
    "full",
    "row_2x",
    "row_4x",
    "col_2x",
    "col_4x",
    "corners_2x",
    "corners_4x",
)


@dataclass(frozen=True)
class SamplingMask:
    """Boolean retained-flag per angular position."""

    grid_rows: int
    grid_cols: int
    retained: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.retained.shape != (self.grid_rows, self.grid_cols):
            raise ValueError("retained grid does not match stated dimensions")
        if self.retained.dtype != np.bool_:
            raise ValueError("retained grid must be boolean")
        if not self.retained.any():
            raise ValueError("mask retains no positions")
        self.retained.flags.writeable = False

    @property
    def retained_count(self) -> int:
        return int(self.retained.sum())

    def retained_set(self) -> set[ViewIndex]:
        return {ViewIndex(int(r), int(c)) for r, c in np.argwhere(self.retained)}


@dataclass(frozen=True)
class SampledLightField:
    """The views that survive a sub-sampling pattern, keyed by position."""

    pattern: SamplingPattern
    mask: SamplingMask
    view_height: int
    view_width: int
    views: dict[ViewIndex, np.ndarray] = field(repr=False)

    def __post_init__(self) -> None:
        if set(self.views) != self.mask.retained_set():
            raise ValueError("retained views do not match mask")

    @property
    def grid_rows(self) -> int:
        return self.mask.grid_rows

    @property
    def grid_cols(self) -> int:
        return self.mask.grid_cols


def _check_axis(n: int, factor: int, axis_name: str) -> None:
    if (n - 1) % factor != 0:
        raise ValueError(
            f"grid {axis_name} count {n} incompatible with factor {factor}: "
            f"({n} - 1) must be divisible by {factor}"
        )


def make_mask(pattern: SamplingPattern, grid_rows: int, grid_cols: int) -> SamplingMask:
    """Build the retained-position mask of a pattern for a given grid."""
    if grid_rows < 1 or grid_cols < 1:
        raise ValueError("grid must be at least 1x1")
    k = pattern.factor
    kind = pattern.axis_kind
    rows_kept = np.ones(grid_rows, dtype=bool)
    cols_kept = np.ones(grid_cols, dtype=bool)
    if kind in (AxisKind.ROW, AxisKind.CORNERS):
        _check_axis(grid_rows, k, "row")
        rows_kept = (np.arange(grid_rows) % k) == 0
    if kind in (AxisKind.COL, AxisKind.CORNERS):
        _check_axis(grid_cols, k, "col")
        cols_kept = (np.arange(grid_cols) % k) == 0
    retained = np.outer(rows_kept, cols_kept)
    return SamplingMask(grid_rows, grid_cols, retained)


def apply_pattern(lf: LightField, pattern: SamplingPattern) -> SampledLightField:
    """Keep only the views retained by the pattern (no pixel data copied)."""
    mask = make_mask(pattern, lf.grid_rows, lf.grid_cols)
    views = {idx: lf.views[idx.row, idx.col] for idx in mask.retained_set()}
    return SampledLightField(pattern, mask, lf.view_height, lf.view_width, views)


def snake_order(mask: SamplingMask) -> list[ViewIndex]:
    """Serpentine scan of the retained positions.

    Retained rows are visited top to bottom; the first retained row is
    scanned left to right and the direction alternates on each subsequent
    retained row.
    """
    sequence: list[ViewIndex] = []
    direction = 1
    for r in range(mask.grid_rows):
        cols = np.flatnonzero(mask.retained[r])
        if cols.size == 0:
            continue
        ordered = cols if direction == 1 else cols[::-1]
        sequence.extend(ViewIndex(r, int(c)) for c in ordered)
        direction = -direction
    if not sequence:
        raise ValueError("mask retains no positions")
    return sequence


def missing_views(mask: SamplingMask) -> set[ViewIndex]:
    """Complement of the retained set within the grid."""
    return {ViewIndex(int(r), int(c)) for r, c in np.argwhere(~mask.retained)}
