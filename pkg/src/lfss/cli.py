"""Command-line interface: pipeline stages as subcommands plus the sweep.

Stages exchange data through directories of PNG views.  Sub-sampled and
decoded view sets carry a ``sampled.json`` sidecar recording the pattern
and grid so later stages need no repeated flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import container, pipeline, reports
from .core import ViewIndex, load_lightfield, save_views
from .metrics import evaluate
from .sampling import (
    PATTERN_NAMES,
    SampledLightField,
    SamplingPattern,
    apply_pattern,
    make_mask,
)
from .synthesis import CORNERS_ORDERS, make_synthesizer, reconstruct

SAMPLED_META = "sampled.json"


def _parse_pair(text: str, what: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what} must look like 9x9, got {text!r}") from None


def _grid(text: str) -> tuple[int, int]:
    return _parse_pair(text, "grid")


def _size(text: str) -> tuple[int, int]:
    return _parse_pair(text, "view size")


def save_sampled(slf: SampledLightField, directory: str | Path) -> None:
    directory = Path(directory)
    save_views(slf.views, directory, scheme="explicit")
    meta = {
        "pattern": slf.pattern.name,
        "grid_rows": slf.grid_rows,
        "grid_cols": slf.grid_cols,
        "view_width": slf.view_width,
        "view_height": slf.view_height,
    }
    with open(directory / SAMPLED_META, "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def load_sampled(directory: str | Path) -> SampledLightField:
    directory = Path(directory)
    meta_path = directory / SAMPLED_META
    if not meta_path.is_file():
        raise ValueError(f"missing {SAMPLED_META} in {directory}")
    meta = json.loads(meta_path.read_text())
    pattern = SamplingPattern.from_name(meta["pattern"])
    mask = make_mask(pattern, meta["grid_rows"], meta["grid_cols"])
    views: dict[ViewIndex, np.ndarray] = {}
    from PIL import Image

    for idx in mask.retained_set():
        path = directory / f"{idx.row}_{idx.col}.png"
        if not path.is_file():
            raise ValueError(f"missing retained view file {path}")
        views[idx] = np.asarray(Image.open(path).convert("RGB"), dtype=np.uint8)
    return SampledLightField(pattern, mask, meta["view_height"], meta["view_width"], views)


def _codec_config(args, qp: int) -> container.CodecConfig:
    return container.CodecConfig(
        backend=args.backend,
        qp=qp,
        external_encode_template=args.encode_template,
        external_decode_template=args.decode_template,
    )


def _add_codec_flags(sub) -> None:
    sub.add_argument("--backend", choices=container.BACKENDS, default="internal")
    sub.add_argument("--encode-template", default=None,
                     help="external encoder command ({input} {output} {width} {height} {frames} {qp})")
    sub.add_argument("--decode-template", default=None,
                     help="external decoder command (same placeholders)")


def cmd_gen_synthetic(args) -> int:
    lf = pipeline.gen_synthetic(
        args.kind, args.grid[0], args.grid[1], args.view_size[0], args.view_size[1],
        disparity=args.disparity, seed=args.seed,
        row_step=args.row_step, col_step=args.col_step,
    )
    save_views(lf, args.out, scheme=args.scheme)
    print(f"wrote {lf.grid_rows * lf.grid_cols} views to {args.out}")
    return 0


def cmd_subsample(args) -> int:
    lf = load_lightfield(args.dataset, args.scheme, args.grid[0], args.grid[1])
    slf = apply_pattern(lf, SamplingPattern.from_name(args.pattern))
    save_sampled(slf, args.out)
    print(f"retained {len(slf.views)} of {lf.grid_rows * lf.grid_cols} views in {args.out}")
    return 0


def cmd_encode(args) -> int:
    lf = load_lightfield(args.dataset, args.scheme, args.grid[0], args.grid[1])
    slf = apply_pattern(lf, SamplingPattern.from_name(args.pattern))
    enc = container.encode_lightfield(slf, _codec_config(args, args.qp))
    data = container.serialize(enc)
    Path(args.out).write_bytes(data)
    print(f"encoded {len(enc.chunks)} chunk(s), {len(data)} bytes -> {args.out}")
    return 0


def cmd_decode(args) -> int:
    enc = container.parse(Path(args.container).read_bytes())
    cfg = container.CodecConfig(
        backend=enc.backend,
        qp=enc.qp,
        external_encode_template=args.encode_template,
        external_decode_template=args.decode_template,
    )
    slf = container.decode_lightfield(enc, cfg)
    save_sampled(slf, args.out)
    print(f"decoded {len(slf.views)} views ({enc.pattern.name}, qp={enc.qp}) -> {args.out}")
    return 0


def cmd_reconstruct(args) -> int:
    slf = load_sampled(args.sampled)
    synth = make_synthesizer(args.synthesizer)
    lf = reconstruct(slf, synth, args.corners_order)
    save_views(lf, args.out, scheme="explicit")
    print(f"reconstructed {lf.grid_rows}x{lf.grid_cols} grid -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    if (args.bits is None) == (args.container is None):
        print("evaluate: exactly one of --bits or --container is required", file=sys.stderr)
        return 2
    if args.container is not None:
        enc = container.parse(Path(args.container).read_bytes())
        bits = container.rate_bits(enc)
        qp = enc.qp
    else:
        bits = args.bits
        qp = args.qp
        if qp is None:
            print("evaluate: --qp is required with --bits", file=sys.stderr)
            return 2
    test = load_lightfield(args.test, args.test_scheme, args.grid[0], args.grid[1])
    ref = load_lightfield(args.reference, args.ref_scheme, args.grid[0], args.grid[1])
    point = evaluate(test, ref, bits, qp, args.psnr_domain)
    reports.write_rd_point_json(args.out, point, extra={"psnr_domain": args.psnr_domain})
    print(
        f"bpp={point.bpp:.5f} psnr_mean={point.psnr_mean:.3f} dB "
        f"psnr_std={point.psnr_std:.3f} ssim_mean={point.ssim_mean:.5f} -> {args.out}"
    )
    return 0


def cmd_sweep(args) -> int:
    base: dict = {}
    if args.config:
        base = json.loads(Path(args.config).read_text())
    overrides = {
        "dataset_path": args.dataset,
        "naming_scheme": args.scheme,
        "strategies": tuple(args.strategies.split(",")) if args.strategies else None,
        "qps": tuple(int(q) for q in args.qps.split(",")) if args.qps else None,
        "codec_backend": args.backend,
        "encode_template": args.encode_template,
        "decode_template": args.decode_template,
        "synthesizer": args.synthesizer,
        "psnr_domain": args.psnr_domain,
        "corners_order": args.corners_order,
        "output_dir": args.out,
        "jobs": args.jobs,
    }
    if args.grid:
        overrides["grid_rows"], overrides["grid_cols"] = args.grid
    if args.no_figures:
        overrides["figures"] = False
    base.update({k: v for k, v in overrides.items() if v is not None})
    cfg = pipeline.PipelineConfig.from_dict(base)

    result = pipeline.run_pipeline(cfg)
    written = pipeline.write_reports(result, cfg.output_dir)
    for cell, msg in sorted(result.errors.items()):
        print(f"cell {cell[0]} qp={cell[1]} failed: {msg}", file=sys.stderr)
    if result.bd_rows:
        print(reports.format_bd_table(result.bd_rows, "full"))
    elif result.bd_note:
        print(result.bd_note)
    print(f"wrote {len(written)} report files to {cfg.output_dir}")
    return 1 if result.errors else 0


def cmd_bd(args) -> int:
    curves = reports.read_rd_curves_csv(args.curves)
    rows = pipeline.report_bd(curves, args.anchor)
    if args.out:
        reports.write_bd_table_csv(args.out, rows)
    print(reports.format_bd_table(rows, args.anchor))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lfss",
        description="Light field view sub-sampling, compression and RD evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synthetic", help="generate a synthetic light field dataset")
    p.add_argument("--kind", choices=pipeline.SYNTHETIC_KINDS, required=True)
    p.add_argument("--grid", type=_grid, default=(9, 9))
    p.add_argument("--view-size", type=_size, default=(128, 128), metavar="WxH")
    p.add_argument("--disparity", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--row-step", type=int, default=10)
    p.add_argument("--col-step", type=int, default=5)
    p.add_argument("--scheme", choices=("linear", "explicit"), default="linear")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("subsample", help="apply a sub-sampling pattern to a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--scheme", choices=("linear", "explicit"), default="linear")
    p.add_argument("--grid", type=_grid, required=True)
    p.add_argument("--pattern", choices=PATTERN_NAMES, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_subsample)

    p = sub.add_parser("encode", help="sub-sample and encode a dataset to a container")
    p.add_argument("--dataset", required=True)
    p.add_argument("--scheme", choices=("linear", "explicit"), default="linear")
    p.add_argument("--grid", type=_grid, required=True)
    p.add_argument("--pattern", choices=PATTERN_NAMES, required=True)
    p.add_argument("--qp", type=int, required=True)
    _add_codec_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode a container to retained views")
    p.add_argument("--container", required=True)
    p.add_argument("--encode-template", default=None)
    p.add_argument("--decode-template", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("reconstruct", help="fill missing views of a decoded view set")
    p.add_argument("--sampled", required=True, help="directory written by decode/subsample")
    p.add_argument("--synthesizer", default="bilinear",
                   help='"bilinear" or "external:<command template>"')
    p.add_argument("--corners-order", choices=CORNERS_ORDERS, default="col_row")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("evaluate", help="PSNR/SSIM/bpp of a reconstruction vs the original")
    p.add_argument("--test", required=True)
    p.add_argument("--test-scheme", choices=("linear", "explicit"), default="explicit")
    p.add_argument("--reference", required=True)
    p.add_argument("--ref-scheme", choices=("linear", "explicit"), default="linear")
    p.add_argument("--grid", type=_grid, required=True)
    p.add_argument("--bits", type=int, default=None, help="encoded size in bits")
    p.add_argument("--container", default=None, help="take size and qp from this container")
    p.add_argument("--qp", type=int, default=None)
    p.add_argument("--psnr-domain", choices=("y", "rgb"), default="y")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="run the full strategy x qp pipeline sweep")
    p.add_argument("--config", default=None, help="JSON pipeline config file")
    p.add_argument("--dataset", default=None)
    p.add_argument("--scheme", choices=("linear", "explicit"), default=None)
    p.add_argument("--grid", type=_grid, default=None)
    p.add_argument("--strategies", default=None, help="comma-separated pattern names")
    p.add_argument("--qps", default=None, help="comma-separated QP values")
    p.add_argument("--backend", choices=container.BACKENDS, default=None)
    p.add_argument("--encode-template", default=None)
    p.add_argument("--decode-template", default=None)
    p.add_argument("--synthesizer", default=None)
    p.add_argument("--psnr-domain", choices=("y", "rgb"), default=None)
    p.add_argument("--corners-order", choices=CORNERS_ORDERS, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bd", help="BD table from an rd_curves.csv")
    p.add_argument("--curves", required=True)
    p.add_argument("--anchor", default="full")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bd)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"lfss {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
