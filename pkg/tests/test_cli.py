import csv
import json

import pytest

from loadcast.cli import main
from loadcast.ingest import write_aligned_csv
from loadcast.synthetic import generate_synthetic

from _util import toy_series


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    generate_synthetic(0.05, 9, out)  # 438 hours
    return out


@pytest.fixture(scope="module")
def aligned_csv(tmp_path_factory, synth_dir):
    out = tmp_path_factory.mktemp("ingested")
    code = main(["ingest", str(synth_dir / "load.csv"), str(synth_dir / "weather.csv"),
                 "--out", str(out)])
    assert code == 0
    return out / "aligned.csv"


def train_config(aligned, out, kind="fcnn", **training):
    cfg = {
        "data": {"aligned": str(aligned)},
        "features": {"time_features": ["hour"], "weather_features": ["temp"]},
        "model": {"kind": kind, "fcnn_hidden": [16]},
        "training": {"epochs": 4, "batch_size": 64, "seed": 1, **training},
        "output": str(out),
    }
    return cfg


class TestSynth:
    def test_writes_expected_row_counts(self, tmp_path, capsys):
        code = main(["synth", "--years", "0.02", "--seed", "4", "--out", str(tmp_path)])
        assert code == 0
        n = round(0.02 * 8760)
        assert sum(1 for _ in open(tmp_path / "load.csv")) == n + 1
        assert sum(1 for _ in open(tmp_path / "weather.csv")) == 8 * n + 1


class TestIngest:
    def test_summary_printed(self, synth_dir, tmp_path, capsys):
        code = main(["ingest", str(synth_dir / "load.csv"),
                     str(synth_dir / "weather.csv"), "--out", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "rows=438" in out and "segments=1" in out
        assert (tmp_path / "aligned.csv").exists()

    def test_disjoint_ranges_fail_cleanly(self, tmp_path, capsys):
        a = tmp_path / "a"
        b = tmp_path / "b"
        generate_synthetic(0.01, 1, a)
        generate_synthetic(0.01, 1, b)
        # shift the weather file far into the future
        text = (b / "weather.csv").read_text().replace("2015-", "2030-")
        (b / "weather.csv").write_text(text)
        code = main(["ingest", str(a / "load.csv"), str(b / "weather.csv"),
                     "--out", str(tmp_path / "out")])
        assert code == 1
        assert "error[EmptyIntersection]" in capsys.readouterr().err

    def test_gap_reported(self, tmp_path, capsys):
        src = tmp_path / "src"
        generate_synthetic(0.01, 2, src)
        # remove two mid-series load rows to create a gap
        lines = (src / "load.csv").read_text().strip().split("\n")
        (src / "load.csv").write_text("\n".join(lines[:30] + lines[32:]) + "\n")
        code = main(["ingest", str(src / "load.csv"), str(src / "weather.csv"),
                     "--out", str(tmp_path / "out")])
        assert code == 0
        out = capsys.readouterr().out
        assert "segments=2" in out and "gap_hours=2" in out


class TestTrain:
    def test_writes_model_history_config(self, aligned_csv, tmp_path):
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(train_config(aligned_csv, tmp_path / "out")))
        code = main(["train", "--config", str(cfg_path)])
        assert code == 0
        assert (tmp_path / "out" / "model.lcst").exists()
        assert (tmp_path / "out" / "config.json").exists()
        rows = list(csv.reader(open(tmp_path / "out" / "history.csv")))
        assert rows[0] == ["epoch", "train_loss", "val_loss"]
        assert len(rows) == 1 + 4
        resolved = json.loads((tmp_path / "out" / "config.json").read_text())
        assert resolved["window"] == {"t1": 6, "t2": 4}  # defaults echoed

    def test_invalid_window_fails_before_reading_data(self, tmp_path, capsys):
        cfg = train_config("/nonexistent/aligned.csv", tmp_path / "out")
        cfg["window"] = {"t1": 0}
        cfg_path = tmp_path / "bad.json"
        cfg_path.write_text(json.dumps(cfg))
        code = main(["train", "--config", str(cfg_path)])
        assert code == 1
        assert "error[ConfigError]" in capsys.readouterr().err

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        cfg = train_config("/nonexistent/aligned.csv", tmp_path / "out")
        cfg["trainnig"] = {}
        cfg_path = tmp_path / "typo.json"
        cfg_path.write_text(json.dumps(cfg))
        assert main(["train", "--config", str(cfg_path)]) == 1
        assert "trainnig" in capsys.readouterr().err

    def test_rerun_identical_artifact(self, aligned_csv, tmp_path):
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(train_config(aligned_csv, tmp_path / "a")))
        assert main(["train", "--config", str(cfg_path)]) == 0
        cfg_path.write_text(json.dumps(train_config(aligned_csv, tmp_path / "b")))
        assert main(["train", "--config", str(cfg_path)]) == 0
        assert ((tmp_path / "a" / "model.lcst").read_bytes()
                == (tmp_path / "b" / "model.lcst").read_bytes())

    def test_seed_flag_overrides(self, aligned_csv, tmp_path):
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(train_config(aligned_csv, tmp_path / "a")))
        assert main(["train", "--config", str(cfg_path), "--seed", "2"]) == 0
        resolved = json.loads((tmp_path / "a" / "config.json").read_text())
        assert resolved["training"]["seed"] == 2


@pytest.fixture(scope="module")
def persistence_model(tmp_path_factory, aligned_csv):
    out = tmp_path_factory.mktemp("pmodel")
    cfg = {
        "data": {"aligned": str(aligned_csv)},
        "model": {"kind": "persistence"},
        "output": str(out),
    }
    cfg_path = out / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    assert main(["train", "--config", str(cfg_path)]) == 0
    return out / "model.lcst"


class TestEvaluate:
    def test_persistence_baseline_end_to_end(self, persistence_model, aligned_csv,
                                             tmp_path, capsys):
        code = main(["evaluate", str(persistence_model), str(aligned_csv),
                     "--out", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "MAPE" in out and "R^2" in out and "tolerance accuracy" in out
        assert (tmp_path / "report.json").exists()
        assert (tmp_path / "pred_vs_actual.csv").exists()
        assert (tmp_path / "error_histogram.csv").exists()

    def test_missing_artifact_clear_error(self, aligned_csv, tmp_path, capsys):
        code = main(["evaluate", str(tmp_path / "nope.lcst"), str(aligned_csv),
                     "--out", str(tmp_path)])
        assert code == 1
        assert "error[FileNotFound]" in capsys.readouterr().err

    def test_report_schema(self, persistence_model, aligned_csv, tmp_path):
        main(["evaluate", str(persistence_model), str(aligned_csv),
              "--out", str(tmp_path)])
        doc = json.loads((tmp_path / "report.json").read_text())
        for key in ("model_kind", "selector", "split", "mape_pct", "r2",
                    "tolerance", "ape_pct", "n_points"):
            assert key in doc
        assert doc["split"] == "test"


class TestPredict:
    def test_four_hourly_values(self, persistence_model, aligned_csv, capsys):
        code = main(["predict", str(persistence_model), str(aligned_csv),
                     "--at", "2015-01-02T12:00:00"])
        assert code == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert len(lines) == 4
        assert lines[0].startswith("2015-01-02T13:00:00 ")
        # persistence repeats the last observed load
        values = {float(line.split()[1]) for line in lines}
        assert len(values) == 1

    def test_gap_stamp_rejected(self, persistence_model, tmp_path, capsys):
        series = toy_series(60, seed=1, missing=(30, 31))
        gappy = tmp_path / "gappy.csv"
        write_aligned_csv(series, gappy)
        end = series.stamps[series.segments[1][0] + 1].isoformat()
        code = main(["predict", str(persistence_model), str(gappy), "--at", end])
        assert code == 1
        assert "error[NotContiguous]" in capsys.readouterr().err


class TestGrid:
    def test_custom_grid_config(self, aligned_csv, tmp_path):
        grid_cfg = {
            "name": "mini",
            "rows": [
                {"name": "persistence", "features": {},
                 "model": {"kind": "persistence"}},
                {"name": "svr", "features": {"weather_features": ["temp"]},
                 "model": {"kind": "svr", "svr_mode": "ridge"}},
            ],
            "seeds": [0],
        }
        cfg_path = tmp_path / "grid.json"
        cfg_path.write_text(json.dumps(grid_cfg))
        code = main(["grid", str(cfg_path), str(aligned_csv),
                     "--out", str(tmp_path / "out")])
        assert code == 0
        table = (tmp_path / "out" / "tables" / "table2.csv").read_text()
        assert len(table.strip().split("\n")) == 3

    def test_unknown_grid_name_lists_builtins(self, aligned_csv, tmp_path, capsys):
        code = main(["grid", "table9", str(aligned_csv), "--out", str(tmp_path)])
        assert code == 1
        err = capsys.readouterr().err
        assert "table1" in err and "table5" in err

    def test_bad_seeds_flag_rejected(self, aligned_csv, tmp_path, capsys):
        code = main(["grid", "table1", str(aligned_csv), "--out", str(tmp_path),
                     "--seeds", "0,x"])
        assert code == 1
        assert "error[ConfigError]" in capsys.readouterr().err

    def test_builtin_table1_produces_four_rows(self, aligned_csv, tmp_path):
        code = main(["grid", "table1", str(aligned_csv), "--out", str(tmp_path),
                     "--seeds", "0"])
        assert code == 0
        table = (tmp_path / "tables" / "table1.csv").read_text()
        lines = table.strip().split("\n")
        assert len(lines) == 1 + 4
        assert [line.split(",")[0] for line in lines[1:]] == [
            "svr", "fcnn", "lstm", "lrcn"]

    def test_ablate_alias_runs_table5(self, aligned_csv, tmp_path):
        # trimmed seed list keeps this fast; table5 has 7 rows
        code = main(["ablate", str(aligned_csv), "--out", str(tmp_path),
                     "--seeds", "0"])
        assert code == 0
        table = (tmp_path / "tables" / "table5.csv").read_text()
        assert len(table.strip().split("\n")) == 1 + 7

    def test_rerun_resumes_without_retraining(self, aligned_csv, tmp_path,
                                              monkeypatch):
        grid_cfg = {
            "name": "mini",
            "rows": [{"name": "svr", "features": {"weather_features": ["temp"]},
                      "model": {"kind": "svr", "svr_mode": "ridge"}}],
            "seeds": [0],
        }
        cfg_path = tmp_path / "grid.json"
        cfg_path.write_text(json.dumps(grid_cfg))
        out = tmp_path / "out"
        assert main(["grid", str(cfg_path), str(aligned_csv), "--out", str(out)]) == 0
        table_before = (out / "tables" / "table2.csv").read_bytes()

        import loadcast.experiments as experiments

        def boom(*args, **kwargs):
            raise AssertionError("train must not run on resume")

        monkeypatch.setattr(experiments, "train", boom)
        assert main(["grid", str(cfg_path), str(aligned_csv), "--out", str(out)]) == 0
        assert (out / "tables" / "table2.csv").read_bytes() == table_before


class TestHelp:
    @pytest.mark.parametrize("command", [
        [], ["ingest"], ["synth"], ["train"], ["evaluate"], ["predict"],
        ["grid"], ["ablate"],
    ])
    def test_help_exits_zero(self, command, capsys):
        with pytest.raises(SystemExit) as exit_info:
            main(command + ["--help"])
        assert exit_info.value.code == 0
        assert "usage" in capsys.readouterr().out.lower()
