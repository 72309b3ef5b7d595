import json

import numpy as np
import pytest

from lfss import load_lightfield
from lfss.cli import main

from conftest import stub_template


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def dataset(tmp_path):
    out = tmp_path / "dataset"
    assert run(
        "gen-synthetic", "--kind", "shifted-texture", "--grid", "5x5",
        "--view-size", "16x16", "--disparity", "1", "--seed", "5", "--out", out,
    ) == 0
    return out


@pytest.fixture
def gray_dataset(tmp_path):
    out = tmp_path / "gray"
    assert run("gen-synthetic", "--kind", "ramp", "--grid", "5x5",
               "--view-size", "16x16", "--out", out) == 0
    return out


class TestStageChain:
    def test_full_chain(self, tmp_path, gray_dataset):
        sub = tmp_path / "sub"
        assert run("subsample", "--dataset", gray_dataset, "--grid", "5x5",
                   "--pattern", "corners_2x", "--out", sub) == 0
        meta = json.loads((sub / "sampled.json").read_text())
        assert meta["pattern"] == "corners_2x"
        assert (sub / "0_0.png").is_file() and not (sub / "0_1.png").exists()

        cont = tmp_path / "lf.lfss"
        assert run("encode", "--dataset", gray_dataset, "--grid", "5x5",
                   "--pattern", "corners_2x", "--qp", "0", "--out", cont) == 0
        assert cont.stat().st_size > 0

        dec = tmp_path / "dec"
        assert run("decode", "--container", cont, "--out", dec) == 0
        assert (dec / "sampled.json").is_file()

        rec = tmp_path / "rec"
        assert run("reconstruct", "--sampled", dec, "--synthesizer", "bilinear",
                   "--out", rec) == 0
        lf = load_lightfield(rec, "explicit", 5, 5)
        assert lf.grid_rows == 5

        report = tmp_path / "point.json"
        assert run("evaluate", "--test", rec, "--reference", gray_dataset,
                   "--grid", "5x5", "--container", cont, "--out", report) == 0
        payload = json.loads(report.read_text())
        assert payload["qp"] == 0
        assert payload["bpp"] > 0
        # gray ramp + qp0 + bilinear is the exact end-to-end identity
        grid = np.array(payload["psnr_per_view"])
        assert np.all(grid == 100.0)

    def test_evaluate_with_explicit_bits(self, tmp_path, dataset):
        report = tmp_path / "point.json"
        assert run("evaluate", "--test", dataset, "--test-scheme", "linear",
                   "--reference", dataset, "--grid", "5x5",
                   "--bits", "8000", "--qp", "30", "--out", report) == 0
        payload = json.loads(report.read_text())
        assert payload["psnr_mean"] == 100.0
        assert payload["bpp"] == 8000 / (25 * 16 * 16)

    def test_evaluate_requires_exactly_one_size_source(self, tmp_path, dataset):
        assert run("evaluate", "--test", dataset, "--reference", dataset,
                   "--grid", "5x5", "--out", tmp_path / "x.json") == 2
        assert run("evaluate", "--test", dataset, "--reference", dataset,
                   "--grid", "5x5", "--bits", "10", "--container", "c",
                   "--out", tmp_path / "x.json") == 2


class TestSweepCommand:
    def test_sweep_with_flags(self, tmp_path, dataset, capsys):
        out = tmp_path / "sweep"
        assert run(
            "sweep", "--dataset", dataset, "--scheme", "linear", "--grid", "5x5",
            "--strategies", "full,corners_2x", "--qps", "20,25,30,35,40,45",
            "--jobs", "2", "--no-figures", "--out", out,
        ) == 0
        assert (out / "rd_curves.csv").is_file()
        assert (out / "bd_table.csv").is_file()
        assert (out / "config.json").is_file()
        assert (out / "heatmap_corners_2x_25.json").is_file()
        assert not (out / "rd_psnr.png").exists()
        table = capsys.readouterr().out
        assert "corners_2x" in table

        # bd subcommand re-derives the table from the emitted CSV
        bd_out = tmp_path / "bd2.csv"
        assert run("bd", "--curves", out / "rd_curves.csv", "--anchor", "full",
                   "--out", bd_out) == 0
        assert bd_out.is_file()

    def test_sweep_with_config_file_and_figures(self, tmp_path, dataset):
        cfg = {
            "dataset_path": str(dataset),
            "naming_scheme": "linear",
            "grid_rows": 5,
            "grid_cols": 5,
            "strategies": ["full"],
            "qps": [20, 35],
            "output_dir": str(tmp_path / "out"),
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        assert run("sweep", "--config", cfg_path) == 0
        assert (tmp_path / "out" / "rd_psnr.png").is_file()
        assert (tmp_path / "out" / "heatmap_full_20.png").is_file()
        resolved = json.loads((tmp_path / "out" / "config.json").read_text())
        assert resolved["strategies"] == ["full"]

    def test_sweep_reports_cell_failures(self, tmp_path, dataset, capsys):
        tmpl = stub_template("stub_codec.py", "fail", "{input}", "{output}")
        out = tmp_path / "sweep"
        code = run(
            "sweep", "--dataset", dataset, "--grid", "5x5",
            "--strategies", "full", "--qps", "20", "--backend", "external",
            "--encode-template", tmpl, "--decode-template", tmpl,
            "--no-figures", "--out", out,
        )
        assert code == 1
        assert "exploded" in capsys.readouterr().err
        assert (out / "errors.json").is_file()

    def test_synthetic_sweep_via_config(self, tmp_path):
        cfg = {
            "synthetic": {"kind": "ramp", "view_width": 16, "view_height": 16},
            "grid_rows": 5,
            "grid_cols": 5,
            "strategies": ["full"],
            "qps": [0],
            "figures": False,
            "output_dir": str(tmp_path / "out"),
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        assert run("sweep", "--config", cfg_path) == 0


class TestErrors:
    def test_unknown_pattern_is_usage_error(self, tmp_path, dataset):
        with pytest.raises(SystemExit):
            run("subsample", "--dataset", dataset, "--grid", "5x5",
                "--pattern", "diagonal", "--out", tmp_path / "x")

    def test_runtime_error_returns_one(self, tmp_path):
        assert run("subsample", "--dataset", tmp_path / "absent", "--grid", "5x5",
                   "--pattern", "full", "--out", tmp_path / "x") == 1

    def test_reconstruct_without_metadata(self, tmp_path):
        (tmp_path / "empty").mkdir()
        assert run("reconstruct", "--sampled", tmp_path / "empty",
                   "--out", tmp_path / "x") == 1
