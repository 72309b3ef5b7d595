"""Hermetic intra-frame codec for 4:2:0 frames.

Per plane: pad to a multiple of 8 (edge replication), 8x8 orthonormal
type-II DCT per block, uniform quantization with Qstep = 2^((qp-4)/6),
zigzag scan, run-length coding of zeros, then a byte-oriented entropy
stage (DEFLATE).  qp=0 selects lossless mode: plane bytes go straight
through the entropy stage with no transform.

The coefficient stream is laid out as planar arrays (per-block token
counts, zero runs, nonzero levels) so both directions stay vectorized.
Output is deterministic for a given input and qp.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .core import YuvFrame

FRAME_VERSION = 1
_BLOCK = 8
_ZLIB_LEVEL = 6


class BitstreamError(ValueError):
    """Corrupt, truncated, or wrong-version frame bitstream."""


def qstep_for(qp: int) -> float:
    if not 0 <= qp <= 51:
        raise ValueError(f"qp must be in [0, 51], got {qp}")
    return 2.0 ** ((qp - 4) / 6.0)


def _zigzag_scan() -> np.ndarray:
    """Flat block positions in zigzag scan order (up-right on even diagonals)."""
    order = []
    for s in range(2 * _BLOCK - 1):
        lo, hi = max(0, s - _BLOCK + 1), min(s, _BLOCK - 1)
        rows = range(hi, lo - 1, -1) if s % 2 == 0 else range(lo, hi + 1)
        order.extend(i * _BLOCK + (s - i) for i in rows)
    return np.array(order, dtype=np.int64)

_ZZ = _zigzag_scan()


def _dct_matrix() -> np.ndarray:
    n = np.arange(_BLOCK)
    basis = np.cos((2 * n[None, :] + 1) * n[:, None] * np.pi / (2 * _BLOCK))
    basis *= np.sqrt(2.0 / _BLOCK)
    basis[0] /= np.sqrt(2.0)
    return basis

_DCT = _dct_matrix()


def _pad_to_block(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    ph = -h % _BLOCK
    pw = -w % _BLOCK
    if ph or pw:
        plane = np.pad(plane, ((0, ph), (0, pw)), mode="edge")
    return plane


def _to_blocks(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    return (
        plane.reshape(h // _BLOCK, _BLOCK, w // _BLOCK, _BLOCK)
        .transpose(0, 2, 1, 3)
        .reshape(-1, _BLOCK, _BLOCK)
    )


def _from_blocks(blocks: np.ndarray, padded_h: int, padded_w: int) -> np.ndarray:
    return (
        blocks.reshape(padded_h // _BLOCK, padded_w // _BLOCK, _BLOCK, _BLOCK)
        .transpose(0, 2, 1, 3)
        .reshape(padded_h, padded_w)
    )


def _encode_plane(plane: np.ndarray, qp: int) -> bytes:
    if qp == 0:
        raw = plane.tobytes()
    else:
        qstep = qstep_for(qp)
        padded = _pad_to_block(plane).astype(np.float64)
        blocks = _to_blocks(padded)
        coeffs = _DCT[None] @ blocks @ _DCT.T
        # Epsilon keeps exact half-way coefficients rounding away from zero
        # even when the transform leaves them one ULP below the tie.
        levels_full = np.sign(coeffs) * np.floor(np.abs(coeffs) / qstep + 0.5 + 1e-9)
        scan = levels_full.reshape(-1, _BLOCK * _BLOCK)[:, _ZZ]

        blk_ids, scan_pos = np.nonzero(scan)
        counts = np.bincount(blk_ids, minlength=scan.shape[0]).astype(np.uint8)
        levels = scan[blk_ids, scan_pos].astype(np.int16)
        prev = np.empty_like(scan_pos)
        prev[0:1] = 0
        prev[1:] = scan_pos[:-1]
        first = np.empty(blk_ids.shape, dtype=bool)
        first[0:1] = True
        first[1:] = blk_ids[1:] != blk_ids[:-1]
        runs = np.where(first, scan_pos, scan_pos - prev - 1).astype(np.uint8)

        raw = b"".join(
            (
                struct.pack("<I", len(levels)),
                counts.tobytes(),
                runs.tobytes(),
                levels.astype("<i2").tobytes(),
            )
        )
    return zlib.compress(raw, _ZLIB_LEVEL)


def _decode_plane(raw: bytes, qp: int, h: int, w: int) -> np.ndarray:
    if qp == 0:
        if len(raw) != h * w:
            raise BitstreamError(f"lossless plane expects {h * w} bytes, got {len(raw)}")
        return np.frombuffer(raw, dtype=np.uint8).reshape(h, w).copy()

    padded_h, padded_w = h + (-h % _BLOCK), w + (-w % _BLOCK)
    n_blocks = (padded_h // _BLOCK) * (padded_w // _BLOCK)
    if len(raw) < 4 + n_blocks:
        raise BitstreamError("plane section too short")
    n_tokens = struct.unpack_from("<I", raw, 0)[0]
    expected = 4 + n_blocks + n_tokens + 2 * n_tokens
    if len(raw) != expected:
        raise BitstreamError(f"plane section is {len(raw)} bytes, expected {expected}")
    off = 4
    counts = np.frombuffer(raw, dtype=np.uint8, count=n_blocks, offset=off).astype(np.int64)
    off += n_blocks
    runs = np.frombuffer(raw, dtype=np.uint8, count=n_tokens, offset=off).astype(np.int64)
    off += n_tokens
    levels = np.frombuffer(raw, dtype="<i2", count=n_tokens, offset=off).astype(np.float64)
    if counts.max(initial=0) > _BLOCK * _BLOCK or counts.sum() != n_tokens:
        raise BitstreamError("inconsistent per-block token counts")
    if n_tokens and not levels.all():
        raise BitstreamError("zero level in coefficient stream")

    scan = np.zeros((n_blocks, _BLOCK * _BLOCK), dtype=np.float64)
    if n_tokens:
        blk_ids = np.repeat(np.arange(n_blocks), counts)
        steps = runs + 1
        cum = np.cumsum(steps)
        token_start = np.concatenate([[0], np.cumsum(counts)[:-1]])
        cum_ext = np.concatenate([[0], cum])
        base = cum_ext[token_start]
        pos = cum - np.repeat(base, counts) - 1
        if pos.max() >= _BLOCK * _BLOCK:
            raise BitstreamError("zigzag position overruns block")
        scan[blk_ids, pos] = levels

    coeffs_flat = np.zeros_like(scan)
    coeffs_flat[:, _ZZ] = scan
    coeffs = coeffs_flat.reshape(-1, _BLOCK, _BLOCK) * qstep_for(qp)
    blocks = _DCT.T[None] @ coeffs @ _DCT
    plane = _from_blocks(blocks, padded_h, padded_w)[:h, :w]
    return np.clip(np.floor(plane + 0.5), 0.0, 255.0).astype(np.uint8)


def encode_internal_frame(frame: YuvFrame, qp: int) -> bytes:
    """Encode one 4:2:0 frame to a self-contained byte stream."""
    qstep_for(qp)  # validate range
    head = struct.pack("<BBII", FRAME_VERSION, qp, frame.width, frame.height)
    parts = [head]
    for plane in (frame.y, frame.u, frame.v):
        comp = _encode_plane(np.ascontiguousarray(plane), qp)
        parts.append(struct.pack("<I", len(comp)))
        parts.append(comp)
    return b"".join(parts)


def decode_internal_frame(data: bytes) -> YuvFrame:
    """Decode a stream produced by :func:`encode_internal_frame`."""
    if len(data) < 10:
        raise BitstreamError("frame stream shorter than header")
    version, qp, w, h = struct.unpack_from("<BBII", data, 0)
    if version != FRAME_VERSION:
        raise BitstreamError(f"unsupported frame stream version {version}")
    if not 0 <= qp <= 51 or w < 1 or h < 1:
        raise BitstreamError("corrupt frame header")
    ch, cw = (h + 1) // 2, (w + 1) // 2
    dims = ((h, w), (ch, cw), (ch, cw))
    off = 10
    planes = []
    for ph, pw in dims:
        if off + 4 > len(data):
            raise BitstreamError("truncated frame stream")
        (comp_len,) = struct.unpack_from("<I", data, off)
        off += 4
        if off + comp_len > len(data):
            raise BitstreamError("truncated frame stream")
        try:
            raw = zlib.decompress(data[off : off + comp_len])
        except zlib.error as exc:
            raise BitstreamError(f"entropy stage failed: {exc}") from exc
        off += comp_len
        planes.append(_decode_plane(raw, qp, ph, pw))
    if off != len(data):
        raise BitstreamError(f"{len(data) - off} trailing bytes after frame stream")
    return YuvFrame(y=planes[0], u=planes[1], v=planes[2])
