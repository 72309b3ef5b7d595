import json

import numpy as np
import pytest

from lfss import PipelineConfig, gen_synthetic, report_bd, run_pipeline
from lfss.metrics import RdCurve, RdPoint
from lfss.pipeline import run_cell, write_reports
from lfss.reports import read_rd_curves_csv

from conftest import stub_template


class TestGenSynthetic:
    def test_ramp_values(self):
        lf = gen_synthetic("ramp", 9, 9, 8, 8, row_step=10, col_step=0)
        for c in range(9):
            assert np.all(lf.views[3, c] == 30)
        assert np.all(lf.views[8, 0] == 80)

    def test_ramp_clamps_to_byte_range(self):
        lf = gen_synthetic("ramp", 9, 9, 4, 4, row_step=40, col_step=0)
        assert np.all(lf.views[8, 0] == 255)

    def test_zero_disparity_views_identical(self):
        lf = gen_synthetic("shifted-texture", 5, 5, 16, 16, disparity=0, seed=1)
        for r in range(5):
            for c in range(5):
                assert np.array_equal(lf.views[r, c], lf.views[0, 0])

    def test_seed_determinism(self):
        a = gen_synthetic("shifted-texture", 3, 3, 16, 16, disparity=2, seed=9)
        b = gen_synthetic("shifted-texture", 3, 3, 16, 16, disparity=2, seed=9)
        assert np.array_equal(a.views, b.views)

    def test_disparity_shifts_with_wraparound(self):
        lf = gen_synthetic("shifted-texture", 3, 3, 16, 16, disparity=2, seed=9)
        expected = np.roll(lf.views[0, 0], (2, 4), axis=(0, 1))
        assert np.array_equal(lf.views[1, 2], expected)

    def test_negative_disparity_rejected(self):
        with pytest.raises(ValueError):
            gen_synthetic("shifted-texture", 3, 3, 8, 8, disparity=-1)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            gen_synthetic("fractal", 3, 3, 8, 8)


class TestPipelineConfig:
    def test_requires_source(self):
        with pytest.raises(ValueError, match="dataset_path or synthetic"):
            PipelineConfig()

    def test_rejects_unknown_strategy(self):
        with pytest.raises(ValueError):
            PipelineConfig(synthetic={"kind": "ramp"}, strategies=("spiral_2x",))

    def test_rejects_empty_lists(self):
        with pytest.raises(ValueError):
            PipelineConfig(synthetic={"kind": "ramp"}, strategies=())
        with pytest.raises(ValueError):
            PipelineConfig(synthetic={"kind": "ramp"}, qps=())

    def test_dict_round_trip(self):
        cfg = PipelineConfig(
            synthetic={"kind": "ramp", "view_width": 16, "view_height": 16},
            strategies=("full", "row_2x"),
            qps=(20, 30),
        )
        assert PipelineConfig.from_dict(cfg.to_dict()) == cfg


def tiny_config(**overrides):
    base = dict(
        synthetic={"kind": "shifted-texture", "view_width": 16, "view_height": 16,
                   "disparity": 1, "seed": 5},
        grid_rows=5,
        grid_cols=5,
        strategies=("full", "corners_2x"),
        qps=(20, 35),
        figures=False,
        jobs=2,
    )
    base.update(overrides)
    return PipelineConfig(**base)


class TestRunPipeline:
    def test_two_strategies_two_qps(self):
        result = run_pipeline(tiny_config())
        assert set(result.points) == {("full", 20), ("full", 35),
                                      ("corners_2x", 20), ("corners_2x", 35)}
        assert not result.errors
        assert set(result.curves) == {"full", "corners_2x"}
        for curve in result.curves.values():
            assert len(curve.points) == 2

    def test_single_lossless_cell_has_capped_psnr(self):
        cfg = tiny_config(
            synthetic={"kind": "ramp", "view_width": 16, "view_height": 16},
            strategies=("full",), qps=(0,),
        )
        result = run_pipeline(cfg)
        point = result.points[("full", 0)]
        assert np.all(point.psnr_per_view == 100.0)
        assert len(result.curves["full"].points) == 1

    def test_bd_needs_at_least_four_points(self):
        result = run_pipeline(tiny_config())
        # only 2 qps: bd per strategy fails with a note, not a cell error
        assert not result.bd_rows
        assert "insufficient points" in result.bd_note
        assert not result.errors

    def test_bd_rows_with_six_qps(self):
        result = run_pipeline(tiny_config(qps=(20, 25, 30, 35, 40, 45)))
        assert [row[0] for row in result.bd_rows] == ["corners_2x"]

    def test_no_anchor_note(self):
        result = run_pipeline(tiny_config(strategies=("corners_4x",)))
        assert result.bd_rows == []
        assert "anchor" in result.bd_note

    def test_per_cell_failure_isolation(self):
        # corners_2x is invalid on a 6x6 grid: its cells fail, full proceeds
        cfg = tiny_config(grid_rows=6, grid_cols=6, strategies=("full", "corners_2x"))
        result = run_pipeline(cfg)
        assert set(result.points) == {("full", 20), ("full", 35)}
        assert set(result.errors) == {("corners_2x", 20), ("corners_2x", 35)}
        assert all("incompatible" in msg for msg in result.errors.values())

    def test_failing_external_backend_is_isolated(self):
        tmpl = stub_template("stub_codec.py", "fail", "{input}", "{output}")
        cfg = tiny_config(
            strategies=("full",), qps=(20,),
            codec_backend="external", encode_template=tmpl, decode_template=tmpl,
        )
        result = run_pipeline(cfg)
        assert not result.points
        assert "exploded" in result.errors[("full", 20)]


class TestRunCell:
    def test_full_qp0_identity(self):
        lf = gen_synthetic("ramp", 5, 5, 16, 16)
        cfg = tiny_config(strategies=("full",), qps=(0,))
        point = run_cell(lf, "full", 0, cfg)
        assert point.psnr_mean == 100.0
        assert point.ssim_mean == pytest.approx(1.0, abs=1e-12)


class TestReportBd:
    def _curves(self, qps=6):
        cfg = tiny_config(qps=tuple(range(20, 20 + 5 * qps, 5))[:qps])
        return run_pipeline(cfg).curves

    def test_anchor_against_itself_is_zero(self):
        curves = self._curves()
        rows = report_bd({"full": curves["full"]}, "full")
        assert rows == [("full", 0.0, 0.0)]

    def test_halved_rate_curve(self):
        pts = [RdPoint(qp=i, bpp=b, psnr_mean=p, psnr_std=0.0, ssim_mean=0.9)
               for i, (b, p) in enumerate(zip((0.2, 0.5, 1.1, 2.4), (30, 33, 35, 37)))]
        anchor = RdCurve("full", tuple(pts))
        half = RdCurve("half", tuple(
            RdPoint(qp=p.qp, bpp=p.bpp / 2, psnr_mean=p.psnr_mean, psnr_std=0.0,
                    ssim_mean=0.9) for p in pts))
        rows = report_bd({"full": anchor, "half": half}, "full")
        by_label = dict((label, (bp, br)) for label, bp, br in rows)
        assert by_label["half"][1] == pytest.approx(-50.0, abs=1e-9)

    def test_missing_anchor(self):
        with pytest.raises(ValueError, match="anchor"):
            report_bd({}, "full")

    def test_three_point_curve_errors(self):
        pts = [RdPoint(qp=i, bpp=b, psnr_mean=p, psnr_std=0.0, ssim_mean=0.9)
               for i, (b, p) in enumerate(zip((0.2, 0.5, 1.1), (30, 33, 35)))]
        curve = RdCurve("full", tuple(pts))
        with pytest.raises(ValueError, match="insufficient points"):
            report_bd({"full": curve}, "full")


class TestWriteReports:
    def test_emits_all_report_files(self, tmp_path):
        result = run_pipeline(tiny_config(qps=(20, 25, 30, 35)))
        written = write_reports(result, tmp_path)
        for name in ("config", "rd_curves", "bd_table"):
            assert written[name].is_file()
        assert (tmp_path / "heatmap_corners_2x_30.json").is_file()
        payload = json.loads((tmp_path / "heatmap_corners_2x_30.json").read_text())
        assert payload["strategy"] == "corners_2x"
        assert len(payload["psnr_per_view"]) == 5
        assert payload["config"]["grid_rows"] == 5

    def test_csv_round_trip_reproduces_curves(self, tmp_path):
        result = run_pipeline(tiny_config(qps=(20, 30, 40)))
        write_reports(result, tmp_path)
        parsed = read_rd_curves_csv(tmp_path / "rd_curves.csv")
        assert set(parsed) == set(result.curves)
        for label, curve in result.curves.items():
            for got, want in zip(parsed[label].points, curve.points):
                assert got.qp == want.qp
                assert got.bpp == want.bpp
                assert got.psnr_mean == want.psnr_mean
                assert got.psnr_std == want.psnr_std
                assert got.ssim_mean == want.ssim_mean

    def test_figures_rendered_when_enabled(self, tmp_path):
        result = run_pipeline(tiny_config(strategies=("full",), qps=(20, 35),
                                          figures=True))
        written = write_reports(result, tmp_path)
        assert written["fig_rd_psnr"].is_file()
        assert written["fig_rd_ssim"].is_file()
        assert written["fig_psnr_std"].is_file()
        assert (tmp_path / "heatmap_full_20.png").is_file()

    def test_error_report_written(self, tmp_path):
        cfg = tiny_config(grid_rows=6, grid_cols=6, strategies=("full", "corners_2x"))
        result = run_pipeline(cfg)
        write_reports(result, tmp_path)
        errors = json.loads((tmp_path / "errors.json").read_text())
        assert "corners_2x@qp20" in errors
