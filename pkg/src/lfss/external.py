"""Adapter for external video encoder/decoder command-line tools.

The retained views are written as one frame-sequential planar I420 file in
snake order, the encoder command runs once over that sequence, and the
paired decoder command turns the bitstream back into an I420 file that is
split into frames again.  Command templates use ``str.format`` placeholders:
{input}, {output}, {width}, {height}, {frames}, {qp}.
"""

from __future__ import annotations

import shlex
import subprocess
import tempfile
from pathlib import Path

import numpy as np

from .core import YuvFrame


class ExternalToolError(RuntimeError):
    """External encoder/decoder invocation failed."""


def frame_to_i420(frame: YuvFrame) -> bytes:
    return frame.y.tobytes() + frame.u.tobytes() + frame.v.tobytes()


def i420_to_frames(data: bytes, width: int, height: int, n_frames: int) -> list[YuvFrame]:
    ch, cw = (height + 1) // 2, (width + 1) // 2
    ysize, csize = width * height, ch * cw
    frame_size = ysize + 2 * csize
    if len(data) != frame_size * n_frames:
        raise ExternalToolError(
            f"I420 stream is {len(data)} bytes, expected {frame_size * n_frames} "
            f"({n_frames} frames of {width}x{height})"
        )
    frames = []
    for i in range(n_frames):
        base = i * frame_size
        y = np.frombuffer(data, np.uint8, ysize, base).reshape(height, width)
        u = np.frombuffer(data, np.uint8, csize, base + ysize).reshape(ch, cw)
        v = np.frombuffer(data, np.uint8, csize, base + ysize + csize).reshape(ch, cw)
        frames.append(YuvFrame(y=y.copy(), u=u.copy(), v=v.copy()))
    return frames


def run_command(template: str, **fields) -> None:
    """Fill a command template and run it, raising on nonzero exit."""
    command = template.format(**fields)
    argv = shlex.split(command)
    try:
        proc = subprocess.run(argv, capture_output=True, text=True)
    except OSError as exc:
        raise ExternalToolError(f"cannot launch {argv[0]!r}: {exc}") from exc
    if proc.returncode != 0:
        tail = (proc.stderr or proc.stdout or "").strip()[-500:]
        raise ExternalToolError(
            f"command exited with status {proc.returncode}: {command}\n{tail}"
        )


def encode_sequence(
    frames: list[YuvFrame], template: str, qp: int, width: int, height: int
) -> bytes:
    """Encode a snake-ordered frame sequence with one external invocation."""
    with tempfile.TemporaryDirectory(prefix="lfss-enc-") as tmp:
        yuv_path = Path(tmp) / "input.yuv"
        out_path = Path(tmp) / "output.bin"
        with open(yuv_path, "wb") as fh:
            for frame in frames:
                fh.write(frame_to_i420(frame))
        run_command(
            template,
            input=yuv_path,
            output=out_path,
            width=width,
            height=height,
            frames=len(frames),
            qp=qp,
        )
        if not out_path.is_file():
            raise ExternalToolError(f"encoder produced no output file: {out_path}")
        return out_path.read_bytes()


def decode_sequence(
    bitstream: bytes, template: str, qp: int, width: int, height: int, n_frames: int
) -> list[YuvFrame]:
    """Decode an external bitstream back into snake-ordered frames."""
    with tempfile.TemporaryDirectory(prefix="lfss-dec-") as tmp:
        bin_path = Path(tmp) / "input.bin"
        yuv_path = Path(tmp) / "output.yuv"
        bin_path.write_bytes(bitstream)
        run_command(
            template,
            input=bin_path,
            output=yuv_path,
            width=width,
            height=height,
            frames=n_frames,
            qp=qp,
        )
        if not yuv_path.is_file():
            raise ExternalToolError(f"decoder produced no output file: {yuv_path}")
        return i420_to_frames(yuv_path.read_bytes(), width, height, n_frames)
