"""Encoded light field container: header plus snake-ordered per-view chunks.

Binary layout (little-endian): magic "LFSS", u16 version, u8 pattern id,
u16 grid_rows, u16 grid_cols, u32 view_width, u32 view_height, u8 qp,
u8 backend id, u32 chunk count, then per chunk u16 row, u16 col,
u32 length, payload.

The internal backend stores one chunk per retained view in snake order.
The external backend produces a single joint bitstream for the whole
sequence, stored as one chunk whose row/col carry the 0xFFFF sentinel.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from . import external, frame_codec
from .color import rgb_to_yuv420, yuv420_to_rgb
from .core import ViewIndex, YuvFrame
from .sampling import (
    PATTERN_NAMES,
    SampledLightField,
    SamplingPattern,
    make_mask,
    snake_order,
)

MAGIC = b"LFSS"
CONTAINER_VERSION = 1
BACKENDS = ("internal", "external")
_JOINT = 0xFFFF
_HEADER = struct.Struct("<4sHBHHIIBBI")
_CHUNK_HEAD = struct.Struct("<HHI")


class ContainerFormatError(ValueError):
    """Corrupt, truncated, or wrong-version container."""


@dataclass(frozen=True)
class CodecConfig:
    backend: str = "internal"
    qp: int = 30
    external_encode_template: str | None = None
    external_decode_template: str | None = None

    def __post_init__(self) -> None:
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown codec backend {self.backend!r}")
        if not 0 <= self.qp <= 51:
            raise ValueError(f"qp must be in [0, 51], got {self.qp}")
        if self.backend == "external" and not (
            self.external_encode_template and self.external_decode_template
        ):
            raise ValueError("external backend requires encode and decode command templates")


@dataclass(frozen=True)
class EncodedLightField:
    pattern: SamplingPattern
    grid_rows: int
    grid_cols: int
    view_width: int
    view_height: int
    qp: int
    backend: str
    chunks: tuple[tuple[ViewIndex | None, bytes], ...] = field(repr=False)

    @property
    def total_bytes(self) -> int:
        return _HEADER.size + sum(_CHUNK_HEAD.size + len(p) for _, p in self.chunks)

    @property
    def payload_bytes(self) -> int:
        return sum(len(p) for _, p in self.chunks)


def rate_bits(enc: EncodedLightField) -> int:
    """Coded size used for bpp: whole container for the internal backend,
    raw encoder output for the external backend."""
    if enc.backend == "internal":
        return enc.total_bytes * 8
    return enc.payload_bytes * 8


def serialize(enc: EncodedLightField) -> bytes:
    parts = [
        _HEADER.pack(
            MAGIC,
            CONTAINER_VERSION,
            PATTERN_NAMES.index(enc.pattern.name),
            enc.grid_rows,
            enc.grid_cols,
            enc.view_width,
            enc.view_height,
            enc.qp,
            BACKENDS.index(enc.backend),
            len(enc.chunks),
        )
    ]
    for idx, payload in enc.chunks:
        row, col = (idx.row, idx.col) if idx is not None else (_JOINT, _JOINT)
        parts.append(_CHUNK_HEAD.pack(row, col, len(payload)))
        parts.append(payload)
    return b"".join(parts)


def parse(data: bytes) -> EncodedLightField:
    if len(data) < _HEADER.size:
        raise ContainerFormatError("container shorter than header")
    magic, version, pat_id, rows, cols, vw, vh, qp, backend_id, n_chunks = _HEADER.unpack_from(
        data, 0
    )
    if magic != MAGIC:
        raise ContainerFormatError(f"bad magic {magic!r}")
    if version != CONTAINER_VERSION:
        raise ContainerFormatError(f"unsupported container version {version}")
    if pat_id >= len(PATTERN_NAMES):
        raise ContainerFormatError(f"unknown pattern id {pat_id}")
    if backend_id >= len(BACKENDS):
        raise ContainerFormatError(f"unknown backend id {backend_id}")
    if not 0 <= qp <= 51:
        raise ContainerFormatError(f"qp {qp} out of range")
    pattern = SamplingPattern.from_name(PATTERN_NAMES[pat_id])
    backend = BACKENDS[backend_id]
    if rows < 1 or cols < 1 or vw < 1 or vh < 1:
        raise ContainerFormatError("degenerate grid or view dimensions")

    chunks: list[tuple[ViewIndex | None, bytes]] = []
    off = _HEADER.size
    for _ in range(n_chunks):
        if off + _CHUNK_HEAD.size > len(data):
            raise ContainerFormatError("truncated chunk header")
        row, col, length = _CHUNK_HEAD.unpack_from(data, off)
        off += _CHUNK_HEAD.size
        if off + length > len(data):
            raise ContainerFormatError("truncated chunk payload")
        idx: ViewIndex | None
        if row == _JOINT and col == _JOINT:
            idx = None
        elif row < rows and col < cols:
            idx = ViewIndex(row, col)
        else:
            raise ContainerFormatError(f"chunk index ({row}, {col}) outside grid")
        chunks.append((idx, data[off : off + length]))
        off += length
    if off != len(data):
        raise ContainerFormatError(f"{len(data) - off} trailing bytes after last chunk")

    enc = EncodedLightField(pattern, rows, cols, vw, vh, qp, backend, tuple(chunks))
    _validate_chunk_order(enc)
    return enc


def _validate_chunk_order(enc: EncodedLightField) -> None:
    mask = make_mask(enc.pattern, enc.grid_rows, enc.grid_cols)
    if enc.backend == "external":
        if len(enc.chunks) != 1 or enc.chunks[0][0] is not None:
            raise ContainerFormatError("external backend expects one joint-stream chunk")
        return
    expected = snake_order(mask)
    got = [idx for idx, _ in enc.chunks]
    if got != expected:
        raise ContainerFormatError("chunk order does not match snake scan of the pattern")


def encode_lightfield(slf: SampledLightField, cfg: CodecConfig) -> EncodedLightField:
    """Encode the retained views of a sampled light field in snake order."""
    order = snake_order(slf.mask)
    frames = [rgb_to_yuv420(slf.views[idx]) for idx in order]
    if cfg.backend == "internal":
        chunks = tuple(
            (idx, frame_codec.encode_internal_frame(frame, cfg.qp))
            for idx, frame in zip(order, frames)
        )
    else:
        bitstream = external.encode_sequence(
            frames, cfg.external_encode_template, cfg.qp, slf.view_width, slf.view_height
        )
        chunks = ((None, bitstream),)
    return EncodedLightField(
        pattern=slf.pattern,
        grid_rows=slf.grid_rows,
        grid_cols=slf.grid_cols,
        view_width=slf.view_width,
        view_height=slf.view_height,
        qp=cfg.qp,
        backend=cfg.backend,
        chunks=chunks,
    )


def decode_frames(enc: EncodedLightField, cfg: CodecConfig) -> dict[ViewIndex, YuvFrame]:
    """Decode the retained views to YUV frames, keyed by angular position."""
    if cfg.backend != enc.backend:
        raise ContainerFormatError(
            f"backend mismatch: container says {enc.backend!r}, config says {cfg.backend!r}"
        )
    _validate_chunk_order(enc)
    mask = make_mask(enc.pattern, enc.grid_rows, enc.grid_cols)
    order = snake_order(mask)
    if enc.backend == "internal":
        frames = []
        for _, payload in enc.chunks:
            frame = frame_codec.decode_internal_frame(payload)
            if frame.width != enc.view_width or frame.height != enc.view_height:
                raise ContainerFormatError("frame dimensions disagree with container header")
            frames.append(frame)
    else:
        frames = external.decode_sequence(
            enc.chunks[0][1],
            cfg.external_decode_template,
            enc.qp,
            enc.view_width,
            enc.view_height,
            len(order),
        )
        if len(frames) != len(order):
            raise ContainerFormatError("external decoder returned wrong frame count")
    return dict(zip(order, frames))


def decode_lightfield(enc: EncodedLightField, cfg: CodecConfig) -> SampledLightField:
    """Decode to RGB views with the mask rebuilt from the container header."""
    frames = decode_frames(enc, cfg)
    mask = make_mask(enc.pattern, enc.grid_rows, enc.grid_cols)
    views = {idx: yuv420_to_rgb(frame) for idx, frame in frames.items()}
    return SampledLightField(enc.pattern, mask, enc.view_height, enc.view_width, views)
