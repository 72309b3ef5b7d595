"""RGB <-> YUV 4:2:0 conversion (BT.601 full range, 8-bit).

Forward path: luma from the unrounded weighted sum, full-resolution chroma
rounded and clamped per pixel, then 2x2 box-averaged, rounded and clamped
again.  Odd dimensions get ceiling-sized chroma planes; edge boxes average
only the samples present.  Inverse path: nearest-neighbour chroma
upsampling and the inverse full-range matrix.

Rounding everywhere is half-away-from-zero (values are clamped to
[0, 255] afterwards, so floor(x + 0.5) is equivalent).
"""

from __future__ import annotations

import numpy as np

from .core import YuvFrame

KR = 0.299
KG = 0.587
KB = 0.114


def _round_clip_u8(x: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(x + 0.5), 0.0, 255.0).astype(np.uint8)


def _box_down2(plane: np.ndarray) -> np.ndarray:
    """2x2 box average with edge replication for odd dimensions."""
    h, w = plane.shape
    if h % 2:
        plane = np.concatenate([plane, plane[-1:]], axis=0)
    if w % 2:
        plane = np.concatenate([plane, plane[:, -1:]], axis=1)
    ph, pw = plane.shape
    blocks = plane.reshape(ph // 2, 2, pw // 2, 2)
    return blocks.mean(axis=(1, 3))


def luma_plane(view: np.ndarray) -> np.ndarray:
    """Full-resolution rounded luma of an RGB view."""
    rgb = view.astype(np.float64)
    yp = KR * rgb[..., 0] + KG * rgb[..., 1] + KB * rgb[..., 2]
    return _round_clip_u8(yp)


def rgb_to_yuv420(view: np.ndarray) -> YuvFrame:
    """Convert one 8-bit RGB view to a planar 4:2:0 frame."""
    if view.ndim != 3 or view.shape[2] != 3 or view.dtype != np.uint8:
        raise ValueError(f"expected (H, W, 3) uint8 view, got {view.shape} {view.dtype}")
    rgb = view.astype(np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    yp = KR * r + KG * g + KB * b
    u_full = _round_clip_u8(128.0 + (b - yp) * 0.5 / (1.0 - KB))
    v_full = _round_clip_u8(128.0 + (r - yp) * 0.5 / (1.0 - KR))
    return YuvFrame(
        y=_round_clip_u8(yp),
        u=_round_clip_u8(_box_down2(u_full.astype(np.float64))),
        v=_round_clip_u8(_box_down2(v_full.astype(np.float64))),
    )


def yuv420_to_rgb(frame: YuvFrame) -> np.ndarray:
    """Convert a planar 4:2:0 frame back to an 8-bit RGB view."""
    h, w = frame.y.shape
    y = frame.y.astype(np.float64)
    # Nearest-neighbour upsampling: each chroma sample covers a 2x2 block.
    u = np.repeat(np.repeat(frame.u, 2, axis=0), 2, axis=1)[:h, :w].astype(np.float64)
    v = np.repeat(np.repeat(frame.v, 2, axis=0), 2, axis=1)[:h, :w].astype(np.float64)
    r = y + (v - 128.0) * 2.0 * (1.0 - KR)
    b = y + (u - 128.0) * 2.0 * (1.0 - KB)
    g = (y - KR * r - KB * b) / KG
    return np.stack([_round_clip_u8(r), _round_clip_u8(g), _round_clip_u8(b)], axis=-1)
