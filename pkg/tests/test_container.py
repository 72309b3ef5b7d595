import numpy as np
import pytest

from lfss import (
    CodecConfig,
    ContainerFormatError,
    SamplingPattern,
    apply_pattern,
    decode_lightfield,
    encode_lightfield,
    gen_synthetic,
    parse,
    rate_bits,
    serialize,
    snake_order,
)
from lfss.color import rgb_to_yuv420
from lfss.container import decode_frames
from lfss.external import ExternalToolError

from conftest import stub_template


def small_sampled(pattern_name="corners_2x", size=16, seed=3):
    lf = gen_synthetic("shifted-texture", 5, 5, size, size, disparity=1, seed=seed)
    return lf, apply_pattern(lf, SamplingPattern.from_name(pattern_name))


class TestCodecConfig:
    def test_qp_range(self):
        with pytest.raises(ValueError):
            CodecConfig(qp=52)

    def test_external_requires_templates(self):
        with pytest.raises(ValueError, match="template"):
            CodecConfig(backend="external", qp=30)

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            CodecConfig(backend="quantum", qp=30)


class TestContainerRoundTrip:
    def test_serialize_parse_bit_identical(self):
        _, slf = small_sampled()
        enc = encode_lightfield(slf, CodecConfig(qp=30))
        data = serialize(enc)
        again = serialize(parse(data))
        assert again == data

    def test_header_fields_preserved(self):
        _, slf = small_sampled("row_4x")
        enc = encode_lightfield(slf, CodecConfig(qp=25))
        parsed = parse(serialize(enc))
        assert parsed.pattern.name == "row_4x"
        assert (parsed.grid_rows, parsed.grid_cols) == (5, 5)
        assert (parsed.view_width, parsed.view_height) == (16, 16)
        assert parsed.qp == 25 and parsed.backend == "internal"

    def test_chunk_order_is_snake_order(self):
        _, slf = small_sampled("corners_2x")
        enc = encode_lightfield(slf, CodecConfig(qp=30))
        assert [idx for idx, _ in enc.chunks] == snake_order(slf.mask)

    def test_total_bytes_matches_serialized_length(self):
        _, slf = small_sampled()
        enc = encode_lightfield(slf, CodecConfig(qp=30))
        assert enc.total_bytes == len(serialize(enc))
        assert rate_bits(enc) == 8 * enc.total_bytes

    def test_truncations_error(self):
        _, slf = small_sampled("corners_4x", size=8)
        data = serialize(encode_lightfield(slf, CodecConfig(qp=40)))
        for cut in range(len(data)):
            with pytest.raises(ContainerFormatError):
                parse(data[:cut])

    def test_bad_magic_and_version(self):
        _, slf = small_sampled("corners_4x", size=8)
        data = bytearray(serialize(encode_lightfield(slf, CodecConfig(qp=40))))
        bad = bytearray(data)
        bad[0] = ord("X")
        with pytest.raises(ContainerFormatError, match="magic"):
            parse(bytes(bad))
        bad = bytearray(data)
        bad[4] = 9
        with pytest.raises(ContainerFormatError, match="version"):
            parse(bytes(bad))

    def test_shuffled_chunks_rejected(self):
        _, slf = small_sampled("corners_4x", size=8)
        enc = encode_lightfield(slf, CodecConfig(qp=40))
        shuffled = enc.__class__(
            pattern=enc.pattern,
            grid_rows=enc.grid_rows,
            grid_cols=enc.grid_cols,
            view_width=enc.view_width,
            view_height=enc.view_height,
            qp=enc.qp,
            backend=enc.backend,
            chunks=tuple(reversed(enc.chunks)),
        )
        with pytest.raises(ContainerFormatError, match="snake"):
            parse(serialize(shuffled))


class TestInternalBackend:
    def test_lossless_views_identical_in_yuv(self):
        lf, slf = small_sampled("full")
        cfg = CodecConfig(qp=0)
        frames = decode_frames(encode_lightfield(slf, cfg), cfg)
        for idx, frame in frames.items():
            ref = rgb_to_yuv420(lf.views[idx.row, idx.col])
            assert np.array_equal(frame.y, ref.y)
            assert np.array_equal(frame.u, ref.u)
            assert np.array_equal(frame.v, ref.v)

    def test_decode_rebuilds_mask_from_header(self):
        _, slf = small_sampled("corners_2x")
        cfg = CodecConfig(qp=30)
        dec = decode_lightfield(encode_lightfield(slf, cfg), cfg)
        assert dec.pattern.name == "corners_2x"
        assert len(dec.views) == 9  # (0,2,4)^2 on a 5x5 grid

    def test_full_9x9_has_81_chunks(self, ramp_lf):
        slf = apply_pattern(ramp_lf, SamplingPattern.from_name("full"))
        enc = encode_lightfield(slf, CodecConfig(qp=30))
        assert len(enc.chunks) == 81
        assert enc.pattern.name == "full"

    def test_backend_mismatch_rejected(self):
        _, slf = small_sampled()
        enc = encode_lightfield(slf, CodecConfig(qp=30))
        bad_cfg = CodecConfig(
            backend="external",
            qp=30,
            external_encode_template="x {input} {output}",
            external_decode_template="x {input} {output}",
        )
        with pytest.raises(ContainerFormatError, match="backend"):
            decode_lightfield(enc, bad_cfg)

    def test_deterministic_container(self):
        _, slf = small_sampled()
        cfg = CodecConfig(qp=35)
        assert serialize(encode_lightfield(slf, cfg)) == serialize(encode_lightfield(slf, cfg))


def identity_codec_config(qp=30):
    copy = stub_template("stub_codec.py", "copy", "{input}", "{output}")
    return CodecConfig(
        backend="external",
        qp=qp,
        external_encode_template=copy,
        external_decode_template=copy,
    )


class TestExternalBackend:
    def test_identity_tool_round_trips_yuv_exactly(self):
        lf, slf = small_sampled("corners_4x")
        cfg = identity_codec_config()
        enc = encode_lightfield(slf, cfg)
        assert len(enc.chunks) == 1 and enc.chunks[0][0] is None
        frames = decode_frames(enc, cfg)
        assert set(frames) == set(slf.views)
        for idx, frame in frames.items():
            ref = rgb_to_yuv420(slf.views[idx])
            assert np.array_equal(frame.y, ref.y)
            assert np.array_equal(frame.u, ref.u)
            assert np.array_equal(frame.v, ref.v)

    def test_rate_uses_raw_bitstream_size(self):
        _, slf = small_sampled("corners_4x")
        enc = encode_lightfield(slf, identity_codec_config())
        # identity "encoder": the bitstream is the raw I420 stream of the
        # 4 retained views of corners_4x on a 5x5 grid
        frame_bytes = 16 * 16 + 2 * 8 * 8
        assert rate_bits(enc) == 8 * 4 * frame_bytes
        assert rate_bits(enc) < 8 * enc.total_bytes

    def test_container_round_trip(self):
        _, slf = small_sampled("corners_4x")
        enc = encode_lightfield(slf, identity_codec_config())
        data = serialize(enc)
        assert serialize(parse(data)) == data

    def test_failing_encoder_carries_diagnostic(self):
        _, slf = small_sampled("corners_4x")
        tmpl = stub_template("stub_codec.py", "fail", "{input}", "{output}")
        cfg = CodecConfig(
            backend="external", qp=30,
            external_encode_template=tmpl, external_decode_template=tmpl,
        )
        with pytest.raises(ExternalToolError, match="exploded"):
            encode_lightfield(slf, cfg)

    def test_encoder_without_output_errors(self):
        _, slf = small_sampled("corners_4x")
        tmpl = stub_template("stub_codec.py", "noout", "{input}", "{output}")
        cfg = CodecConfig(
            backend="external", qp=30,
            external_encode_template=tmpl, external_decode_template=tmpl,
        )
        with pytest.raises(ExternalToolError, match="no output"):
            encode_lightfield(slf, cfg)

    def test_short_decoder_output_errors(self):
        _, slf = small_sampled("corners_4x")
        copy = stub_template("stub_codec.py", "copy", "{input}", "{output}")
        short = stub_template("stub_codec.py", "short", "{input}", "{output}")
        cfg = CodecConfig(
            backend="external", qp=30,
            external_encode_template=copy, external_decode_template=short,
        )
        enc = encode_lightfield(slf, cfg)
        with pytest.raises(ExternalToolError, match="expected"):
            decode_frames(enc, cfg)
