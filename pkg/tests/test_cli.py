import json
import math

import numpy as np
import pytest

from chaoscast.cli import main
from chaoscast.embedding import DelayMapSpec, build_embedding
from chaoscast.ensemble import PredictionConfig
from chaoscast.runs import causal_prediction_rows
from chaoscast.serialize import read_embedded_csv, read_series_csv, write_series_csv
from chaoscast.systems import MultiSeries, generate, system_spec


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture()
def logistic_csv(tmp_path):
    out = tmp_path / "gen"
    assert run("generate", "--system", "logistic", "--n", "400",
               "--transient", "100", "--seed", "7", "--out", out) == 0
    return out / "series.csv"


@pytest.fixture()
def lorenz_csv(tmp_path):
    out = tmp_path / "genL"
    assert run("generate", "--system", "lorenz", "--n", "800",
               "--transient", "200", "--seed", "7", "--out", out) == 0
    return out / "series.csv"


class TestGenerate:
    def test_twice_byte_identical(self, tmp_path):
        for d in ("one", "two"):
            assert run("generate", "--system", "logistic", "--n", "100",
                       "--seed", "7", "--out", tmp_path / d) == 0
        assert (tmp_path / "one/series.csv").read_bytes() == (
            tmp_path / "two/series.csv"
        ).read_bytes()

    def test_matches_library(self, logistic_csv):
        series, meta = read_series_csv(logistic_csv)
        expected = generate(system_spec("logistic", transient=100), 400)
        assert np.array_equal(series.values, expected.values)
        assert meta["seed"] == 7
        assert meta["config"]["system"] == "logistic"

    def test_divergent_system_is_runtime_error(self, tmp_path, capsys):
        code = run("generate", "--system", "logistic", "--params", "r=4.5",
                   "--n", "100", "--out", tmp_path)
        assert code == 1
        assert "diverged" in capsys.readouterr().err

    def test_unknown_subcommand_exits_2(self):
        assert run("explode") == 2

    def test_missing_required_field(self, tmp_path, capsys):
        assert run("generate", "--system", "logistic", "--out", tmp_path) == 2
        assert "n" in capsys.readouterr().err


class TestEmbed:
    def test_matches_library(self, logistic_csv, tmp_path):
        out = tmp_path / "emb"
        assert run("embed", "--input", logistic_csv, "--coords", "x:0,x:1",
                   "--target", "x", "--horizon", "1", "--out", out) == 0
        dataset, _ = read_embedded_csv(out / "embedded.csv")
        series, _ = read_series_csv(logistic_csv)
        spec = DelayMapSpec(coords=(("x", 0), ("x", 1)), target="x", horizon=1)
        expected = build_embedding(series, spec)
        assert np.array_equal(dataset.x, expected.x)
        assert np.array_equal(dataset.y, expected.y)

    def test_missing_input_exits_2(self, tmp_path, capsys):
        assert run("embed", "--input", tmp_path / "nope.csv", "--coords", "x:0",
                   "--target", "x", "--out", tmp_path) == 2
        assert "input" in capsys.readouterr().err

    def test_bad_coords_exits_2(self, logistic_csv, tmp_path, capsys):
        assert run("embed", "--input", logistic_csv, "--coords", "x=0",
                   "--target", "x", "--out", tmp_path) == 2
        assert "coords" in capsys.readouterr().err


class TestBoxdim:
    def test_segment_fixture(self, tmp_path):
        # oracle-checkable fixture: 4096 points on a unit segment
        t = np.arange(4096) / 4096.0
        series = MultiSeries(names=("x", "y"), values=np.column_stack([t, 0 * t]))
        csv = tmp_path / "segment.csv"
        write_series_csv(csv, series, {"fixture": "segment"})
        out = tmp_path / "bd"
        grid = ",".join(str(2.0 ** -k) for k in range(1, 7))
        assert run("boxdim", "--input", csv, "--eps-grid", grid, "--out", out) == 0
        payload = json.loads((out / "boxdim.json").read_text())
        assert 0.9 <= payload["d"] <= 1.1
        assert payload["counts"] == [2, 4, 8, 16, 32, 64]
        assert payload["r2"] >= 0.95
        assert payload["config"]["seed"] == 0

    def test_bad_grid_exits_2(self, logistic_csv, tmp_path, capsys):
        assert run("boxdim", "--input", logistic_csv, "--eps-grid", "0.1,0.5",
                   "--out", tmp_path) == 2
        assert "eps_grid" in capsys.readouterr().err


class TestSelfintersect:
    def test_report_fields(self, lorenz_csv, tmp_path):
        out = tmp_path / "si"
        assert run("selfintersect", "--input", lorenz_csv, "--coords", "x:0,x:1,x:2",
                   "--target", "x", "--delta", "2.0", "--epsilon", "0.05",
                   "--out", out) == 0
        payload = json.loads((out / "selfintersect.json").read_text())
        assert payload["delta"] == 2.0 and payload["epsilon"] == 0.05
        assert payload["n_rows"] == 797
        assert payload["fraction"] == len(payload["flagged"]) / payload["n_rows"]

    def test_nonpositive_delta_exits_2(self, lorenz_csv, tmp_path, capsys):
        assert run("selfintersect", "--input", lorenz_csv, "--coords", "x:0",
                   "--target", "x", "--delta", "0", "--epsilon", "0.1",
                   "--out", tmp_path) == 2
        assert "delta" in capsys.readouterr().err


class TestPredict:
    def test_gamma_validation_names_field(self, logistic_csv, tmp_path, capsys):
        code = run("predict", "--input", logistic_csv, "--coords", "x:0,x:1",
                   "--target", "x", "--gamma", "1.5", "--out", tmp_path)
        assert code == 2
        assert "gamma" in capsys.readouterr().err

    def test_rows_match_library(self, logistic_csv, tmp_path):
        out = tmp_path / "pred"
        assert run("predict", "--input", logistic_csv, "--coords", "x:0,x:1",
                   "--target", "x", "--test-count", "25", "--out", out) == 0
        lines = (out / "predictions.jsonl").read_text().splitlines()
        header, rows = json.loads(lines[0]), [json.loads(l) for l in lines[1:]]
        assert header["command"] == "predict"
        series, _ = read_series_csv(logistic_csv)
        spec = DelayMapSpec(coords=(("x", 0), ("x", 1)), target="x", horizon=1)
        expected = causal_prediction_rows(series, spec, 25, PredictionConfig())
        assert rows == expected

    def test_jsonl_deterministic(self, logistic_csv, tmp_path):
        for d in ("p1", "p2"):
            assert run("predict", "--input", logistic_csv, "--coords", "x:0,x:1",
                       "--target", "x", "--test-count", "10",
                       "--out", tmp_path / d) == 0
        assert (tmp_path / "p1/predictions.jsonl").read_bytes() == (
            tmp_path / "p2/predictions.jsonl"
        ).read_bytes()


class TestEnsembleAndCalibrate:
    def test_ensemble_artifact(self, lorenz_csv, tmp_path):
        out = tmp_path / "ens"
        assert run("ensemble", "--input", lorenz_csv, "--p", "2", "--count", "3",
                   "--mode", "coordinate-disjoint", "--target", "x",
                   "--horizon", "5", "--exclusion", "10", "--seed", "3",
                   "--thresholds", "0,10", "--out", out) == 0
        payload = json.loads((out / "ensemble.json").read_text())
        assert len(payload["components"]) == 3
        weights = [c["weight"] for c in payload["components"]]
        assert math.fsum(weights) == pytest.approx(1.0, abs=1e-12)
        qs = payload["quantiles"]
        assert qs["0.05"] <= qs["0.5"] <= qs["0.95"]
        assert set(payload["tail_probabilities"]) == {"0", "10"}
        assert payload["partitions"]["mode"] == "coordinate-disjoint"

    def test_strict_infeasible_exits_2(self, lorenz_csv, tmp_path, capsys):
        assert run("ensemble", "--input", lorenz_csv, "--p", "3", "--count", "4",
                   "--mode", "strict", "--target", "x", "--out", tmp_path) == 2
        assert "infeasible" in capsys.readouterr().err

    def test_calibrate_artifacts(self, lorenz_csv, tmp_path):
        out = tmp_path / "cal"
        assert run("calibrate", "--input", lorenz_csv, "--p", "1", "--count", "3",
                   "--mode", "strict", "--target", "x", "--horizon", "5",
                   "--test-count", "20", "--spacing", "15", "--exclusion", "10",
                   "--out", out) == 0
        payload = json.loads((out / "calibration.json").read_text())
        assert len(payload["pit_values"]) == 20
        assert set(payload["coverage"]) == {"0.5", "0.9"}
        assert payload["spacing"] == 15
        pit_lines = (out / "calibration_pit.csv").read_text().splitlines()
        assert pit_lines[1] == "pit"
        assert len(pit_lines) == 22  # meta + header + 20 values

    def test_insufficient_history_exits_2(self, lorenz_csv, tmp_path, capsys):
        assert run("calibrate", "--input", lorenz_csv, "--p", "1", "--count", "3",
                   "--target", "x", "--test-count", "500", "--spacing", "30",
                   "--out", tmp_path) == 2
        assert "insufficient history" in capsys.readouterr().err


class TestConfigFile:
    def test_flags_override_file(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"system": "logistic", "n": 50, "seed": 3}))
        out = tmp_path / "o"
        assert run("generate", "--config", cfg, "--n", "60", "--out", out) == 0
        series, meta = read_series_csv(out / "series.csv")
        assert series.n == 60
        assert meta["seed"] == 3

    def test_unknown_field_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"system": "logistic", "n": 50, "bogus": 1}))
        assert run("generate", "--config", cfg, "--out", tmp_path) == 2
        assert "bogus" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        assert run("generate", "--config", tmp_path / "none.json",
                   "--out", tmp_path) == 2
        assert "config" in capsys.readouterr().err


class TestPipelineComposability:
    def test_generate_embed_predict_matches_in_process(self, tmp_path):
        gen_out = tmp_path / "g"
        assert run("generate", "--system", "henon", "--n", "300",
                   "--transient", "50", "--seed", "11", "--out", gen_out) == 0
        emb_out = tmp_path / "e"
        assert run("embed", "--input", gen_out / "series.csv",
                   "--coords", "x:0,y:0", "--target", "x", "--horizon", "1",
                   "--out", emb_out) == 0
        pred_out = tmp_path / "p"
        assert run("predict", "--input", gen_out / "series.csv",
                   "--coords", "x:0,y:0", "--target", "x", "--horizon", "1",
                   "--test-count", "30", "--out", pred_out) == 0

        # in-process equivalents over the same pipeline
        series = generate(system_spec("henon", transient=50), 300)
        spec = DelayMapSpec(coords=(("x", 0), ("y", 0)), target="x", horizon=1)
        dataset = build_embedding(series, spec)
        file_dataset, _ = read_embedded_csv(emb_out / "embedded.csv")
        assert np.array_equal(file_dataset.x, dataset.x)
        assert np.array_equal(file_dataset.y, dataset.y)

        rows = causal_prediction_rows(series, spec, 30, PredictionConfig())
        lines = (pred_out / "predictions.jsonl").read_text().splitlines()
        assert [json.loads(l) for l in lines[1:]] == rows
