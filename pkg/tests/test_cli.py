import json
import os

import pytest

from ghicorr.cli import main
from ghicorr.data import parse_met_csv
from ghicorr.data import met_to_csv


def write_json(path, doc):
    path.write_text(json.dumps(doc, indent=2))
    return str(path)


@pytest.fixture
def synth_dir(tmp_path):
    cfg = write_json(tmp_path / "scenario.json", {"n_days": 8, "seed": 2})
    out = tmp_path / "data"
    assert main(["synth", "--config", cfg, "--out", str(out)]) == 0
    return out


class TestSynthCommand:
    def test_writes_expected_files(self, synth_dir):
        assert sorted(os.listdir(synth_dir)) == ["met.csv", "nwp.csv", "scenario.json"]
        meta = json.loads((synth_dir / "scenario.json").read_text())
        assert meta["met_rows"] == 4 * 8 * 24
        assert "met_sha256" in meta

    def test_deterministic_bytes(self, tmp_path):
        cfg = write_json(tmp_path / "s.json", {"n_days": 3, "seed": 5})
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["synth", "--config", cfg, "--out", str(out_a)]) == 0
        assert main(["synth", "--config", cfg, "--out", str(out_b)]) == 0
        assert (out_a / "met.csv").read_bytes() == (out_b / "met.csv").read_bytes()
        assert (out_a / "nwp.csv").read_bytes() == (out_b / "nwp.csv").read_bytes()

    def test_seed_flag_overrides_config(self, tmp_path):
        cfg = write_json(tmp_path / "s.json", {"n_days": 3, "seed": 5})
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["synth", "--config", cfg, "--out", str(out_a), "--seed", "9"]) == 0
        assert main(["synth", "--config", cfg, "--out", str(out_b)]) == 0
        assert (out_a / "met.csv").read_bytes() != (out_b / "met.csv").read_bytes()

    def test_invalid_config_field_named(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "bad.json", {
            "n_days": 3, "channel_biases": {"M1": {"noise_sd": -4.0}}})
        assert main(["synth", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
        err = capsys.readouterr().err
        assert "channel_biases.M1.noise_sd" in err

    def test_missing_config_file(self, tmp_path):
        assert main(["synth", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "o")]) == 2


class TestValidateCommand:
    def test_clean_files(self, synth_dir, capsys):
        rc = main(["validate", str(synth_dir / "met.csv"), str(synth_dir / "nwp.csv")])
        assert rc == 0
        out = capsys.readouterr().out
        assert "met rows: 768" in out
        assert "timestamp overlap" in out

    def test_bad_numeric_names_line(self, synth_dir, tmp_path, capsys):
        lines = (synth_dir / "met.csv").read_text().split("\n")
        cells = lines[3].split(",")
        cells[5] = "not-a-number"
        lines[3] = ",".join(cells)
        bad = tmp_path / "bad.csv"
        bad.write_text("\n".join(lines))
        rc = main(["validate", str(bad), str(synth_dir / "nwp.csv")])
        assert rc == 2
        assert "line 4" in capsys.readouterr().err

    def test_disjoint_dates_report_zero_overlap(self, synth_dir, tmp_path, capsys):
        rows = parse_met_csv((synth_dir / "met.csv").read_bytes())
        import datetime
        shifted = [type(r)(**{**r.__dict__, "date": r.date + datetime.timedelta(days=400)})
                   for r in rows]
        moved = tmp_path / "moved.csv"
        moved.write_bytes(met_to_csv(shifted))
        rc = main(["validate", str(moved), str(synth_dir / "nwp.csv")])
        assert rc == 0
        assert "overlap (met vs nwp): 0 hours" in capsys.readouterr().out


def run_config(tmp_path, synth_dir, **overrides):
    doc = {
        "data": {"files": {"met": str(synth_dir / "met.csv"),
                           "nwp": str(synth_dir / "nwp.csv"),
                           "target": "X0",
                           "neighbors": ["X1", "X2", "X3"]}},
        "specs": {"baselines": True, "variants": [], "families": [], "channels":
                  ["M1", "M2", "M3", "M4"]},
        "protocol": {"test_fraction": 0.2, "split_mode": "random", "k": 5,
                     "n_samples": 2, "seed": 0},
        "output": {"report": str(tmp_path / "out" / "report.json"), "format": "json"},
    }
    for key, value in overrides.items():
        doc[key].update(value)
    return write_json(tmp_path / "run.json", doc)


class TestRunCommand:
    def test_baselines_only(self, tmp_path, synth_dir):
        cfg = run_config(tmp_path, synth_dir)
        assert main(["run", "--config", cfg, "--quiet"]) == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert len(report["entries"]) == 6
        labels = {e["label"] for e in report["entries"]}
        assert labels == {"raw_wrf_M1", "raw_wrf_M2", "raw_wrf_M3", "raw_wrf_M4",
                          "persistence_1", "persistence_24"}
        assert (tmp_path / "out" / "report_fig_baselines.csv").exists()

    def test_rerun_byte_identical(self, tmp_path, synth_dir):
        cfg = run_config(tmp_path, synth_dir)
        assert main(["run", "--config", cfg, "--quiet"]) == 0
        first = (tmp_path / "out" / "report.json").read_bytes()
        assert main(["run", "--config", cfg, "--quiet"]) == 0
        assert (tmp_path / "out" / "report.json").read_bytes() == first

    def test_figure_files_per_group(self, tmp_path, synth_dir):
        cfg = run_config(tmp_path, synth_dir,
                         specs={"variants": ["base", "lag24", "ensemble_lag24"],
                                "families": ["knn"], "channels": ["M1"]})
        assert main(["run", "--config", cfg, "--quiet"]) == 0
        out = tmp_path / "out"
        assert (out / "report_fig_baselines.csv").exists()
        assert (out / "report_fig_base.csv").exists()
        assert (out / "report_fig_lag.csv").exists()
        assert (out / "report_fig_ensemble.csv").exists()
        text = (out / "report_fig_base.csv").read_text().strip().split("\n")
        assert text[0] == "label,nrmse"
        assert text[1].startswith("base_M1_knn,")
        report = json.loads((out / "report.json").read_text())
        assert {e["label"] for e in report["entries"]} >= {"ensemble_lag24_knn"}
        assert all(e["status"] == "ok" for e in report["entries"])

    def test_csv_report_format(self, tmp_path, synth_dir):
        cfg = run_config(tmp_path, synth_dir,
                         output={"report": str(tmp_path / "out" / "report.csv"),
                                 "format": "csv"})
        assert main(["run", "--config", cfg, "--quiet"]) == 0
        lines = (tmp_path / "out" / "report.csv").read_text().strip().split("\n")
        assert lines[0] == "location,label,test_nrmse,cv_mean_nrmse,n_train,n_test,seed"
        assert len(lines) == 7

    def test_strict_fails_on_bad_spec(self, tmp_path):
        # scenario with two channels cannot serve the ensemble variant
        scfg = {"n_days": 8, "seed": 1, "channel_biases": {
            "M1": {"gain": 1.0, "offset": 10.0, "noise_sd": 5.0, "lag_smear": 0},
            "M2": {"gain": 0.9, "offset": 20.0, "noise_sd": 5.0, "lag_smear": 0}}}
        doc = {
            "data": {"synthetic": scfg},
            "specs": {"baselines": False, "variants": ["ensemble"], "families": ["knn"],
                      "channels": ["M1", "M2"]},
            "protocol": {"n_samples": 2, "seed": 0},
            "output": {"report": str(tmp_path / "r.json")},
        }
        cfg = write_json(tmp_path / "run.json", doc)
        assert main(["run", "--config", cfg, "--quiet"]) == 0
        assert main(["run", "--config", cfg, "--quiet", "--strict"]) == 1

    def test_config_errors_exit_2(self, tmp_path, synth_dir, capsys):
        bad = write_json(tmp_path / "bad.json", {"data": {}, "output": {}})
        assert main(["run", "--config", bad]) == 2
        cfg = run_config(tmp_path, synth_dir, protocol={"k": 1})
        assert main(["run", "--config", cfg]) == 2
        assert "protocol.k" in capsys.readouterr().err

    def test_unknown_config_key_named(self, tmp_path, synth_dir, capsys):
        cfg = run_config(tmp_path, synth_dir, protocol={"n_sample": 3})
        assert main(["run", "--config", cfg]) == 2
        assert "n_sample" in capsys.readouterr().err

    def test_unwritable_output_exits_2(self, tmp_path, synth_dir, capsys):
        blocker = tmp_path / "blocked"
        blocker.write_text("a file, not a directory")
        cfg = run_config(tmp_path, synth_dir,
                         output={"report": str(blocker / "report.json")})
        assert main(["run", "--config", cfg, "--quiet"]) == 2
        assert "cannot write" in capsys.readouterr().err

    def test_synthetic_source_with_seed_override(self, tmp_path):
        doc = {
            "data": {"synthetic": {"n_days": 8, "seed": 3}},
            "specs": {"baselines": True},
            "protocol": {"n_samples": 2, "seed": 0},
            "output": {"report": str(tmp_path / "r.json")},
        }
        cfg = write_json(tmp_path / "run.json", doc)
        assert main(["run", "--config", cfg, "--quiet", "--seed", "4"]) == 0
        report = json.loads((tmp_path / "r.json").read_text())
        assert all(e["seed"] == 4 for e in report["entries"])
