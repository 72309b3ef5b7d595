"""Core data model: 4D light fields as dense grids of sub-aperture RGB views.

A light field is stored as a single uint8 array of shape
(grid_rows, grid_cols, height, width, 3).  Angular origin is the top-left
view; rows grow downward, columns grow rightward.  Arrays are frozen after
construction so light fields can be shared freely between workers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from PIL import Image


class ViewIndex(NamedTuple):
    """Angular position of one sub-aperture view (0-based, row-major)."""

    row: int
    col: int


@dataclass(frozen=True)
class YuvFrame:
    """One 4:2:0 planar frame. Chroma planes are ceil(dim/2) of luma."""

    y: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        h, w = self.y.shape
        ch, cw = (h + 1) // 2, (w + 1) // 2
        for name, plane in (("y", self.y), ("u", self.u), ("v", self.v)):
            if plane.dtype != np.uint8:
                raise ValueError(f"{name} plane must be uint8, got {plane.dtype}")
        if self.u.shape != (ch, cw) or self.v.shape != (ch, cw):
            raise ValueError(
                f"chroma planes must be {(ch, cw)} for {h}x{w} luma, "
                f"got u={self.u.shape} v={self.v.shape}"
            )

    @property
    def width(self) -> int:
        return self.y.shape[1]

    @property
    def height(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True)
class LightField:
    """Dense grid of same-sized 8-bit RGB views."""

    views: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = self.views
        if v.ndim != 5 or v.shape[4] != 3:
            raise ValueError(f"views must have shape (rows, cols, H, W, 3), got {v.shape}")
        if v.dtype != np.uint8:
            raise ValueError(f"views must be uint8, got {v.dtype}")
        if min(v.shape[:2]) < 1:
            raise ValueError("grid must be at least 1x1")
        v.flags.writeable = False

    @property
    def grid_rows(self) -> int:
        return self.views.shape[0]

    @property
    def grid_cols(self) -> int:
        return self.views.shape[1]

    @property
    def view_height(self) -> int:
        return self.views.shape[2]

    @property
    def view_width(self) -> int:
        return self.views.shape[3]


def view_at(lf: LightField, idx: ViewIndex) -> np.ndarray:
    """Return the stored view at an angular position, unmodified."""
    row, col = idx
    if not (0 <= row < lf.grid_rows and 0 <= col < lf.grid_cols):
        raise IndexError(
            f"view index ({row}, {col}) outside {lf.grid_rows}x{lf.grid_cols} grid"
        )
    return lf.views[row, col]


_LINEAR_RE = re.compile(r"^input_Cam(\d+)$")
_EXPLICIT_RE = re.compile(r"^(\d+)_(\d+)$")
_IMAGE_SUFFIXES = (".png", ".ppm")

# PIL modes that decode to more than 8 bits per sample.
_HIGH_DEPTH_MODES = {"I", "I;16", "I;16B", "I;16L", "I;16N", "F", "RGB;16"}


def _decode_view(path: Path) -> np.ndarray:
    try:
        img = Image.open(path)
        img.load()
    except Exception as exc:
        raise ValueError(f"unreadable image {path}: {exc}") from exc
    if img.mode in _HIGH_DEPTH_MODES:
        raise ValueError(f"{path}: only 8-bit samples are supported (mode {img.mode})")
    arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
    return arr


def _index_files(directory: Path, scheme: str, grid_rows: int, grid_cols: int):
    """Map each grid position to its image file, or raise for missing views."""
    candidates: dict[ViewIndex, Path] = {}
    for path in sorted(directory.iterdir()):
        if path.suffix.lower() not in _IMAGE_SUFFIXES:
            continue
        stem = path.stem
        if scheme == "linear":
            m = _LINEAR_RE.match(stem)
            if not m:
                continue
            k = int(m.group(1))
            if k >= grid_rows * grid_cols:
                continue
            idx = ViewIndex(k // grid_cols, k % grid_cols)
        elif scheme == "explicit":
            m = _EXPLICIT_RE.match(stem)
            if not m:
                continue
            idx = ViewIndex(int(m.group(1)), int(m.group(2)))
            if not (idx.row < grid_rows and idx.col < grid_cols):
                continue
        else:
            raise ValueError(f"unknown naming scheme {scheme!r} (use 'linear' or 'explicit')")
        candidates[idx] = path

    missing = [
        ViewIndex(r, c)
        for r in range(grid_rows)
        for c in range(grid_cols)
        if ViewIndex(r, c) not in candidates
    ]
    if missing:
        raise ValueError(
            f"missing view file(s) for {len(missing)} position(s) in {directory}, "
            f"first missing {tuple(missing[0])} (scheme={scheme})"
        )
    return candidates


def load_lightfield(
    directory: str | Path, scheme: str, grid_rows: int, grid_cols: int
) -> LightField:
    """Load a dense grid of views from a directory of PNG/PPM files.

    Two naming schemes are accepted: ``linear`` expects ``input_Cam{NNN}``
    with a row-major linear index, ``explicit`` expects ``{row}_{col}``.
    All views must decode to identical 8-bit RGB dimensions.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ValueError(f"not a directory: {directory}")
    files = _index_files(directory, scheme, grid_rows, grid_cols)

    views = None
    for r in range(grid_rows):
        for c in range(grid_cols):
            arr = _decode_view(files[ViewIndex(r, c)])
            if views is None:
                h, w = arr.shape[:2]
                views = np.empty((grid_rows, grid_cols, h, w, 3), dtype=np.uint8)
            elif arr.shape[:2] != views.shape[2:4]:
                raise ValueError(
                    f"view ({r}, {c}) is {arr.shape[1]}x{arr.shape[0]}, "
                    f"expected {views.shape[3]}x{views.shape[2]}"
                )
            views[r, c] = arr
    return LightField(views)


def save_views(
    views: dict[ViewIndex, np.ndarray] | LightField,
    directory: str | Path,
    scheme: str = "explicit",
) -> None:
    """Write views as PNG files using one of the two naming schemes."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if isinstance(views, LightField):
        items = {
            ViewIndex(r, c): views.views[r, c]
            for r in range(views.grid_rows)
            for c in range(views.grid_cols)
        }
        grid_cols = views.grid_cols
    else:
        items = views
        grid_cols = 1 + max((idx.col for idx in items), default=0)
    for idx, arr in items.items():
        if scheme == "linear":
            name = f"input_Cam{idx.row * grid_cols + idx.col:03d}.png"
        elif scheme == "explicit":
            name = f"{idx.row}_{idx.col}.png"
        else:
            raise ValueError(f"unknown naming scheme {scheme!r}")
        Image.fromarray(np.asarray(arr)).save(directory / name)
