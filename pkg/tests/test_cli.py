"""End-to-end command-line behavior on miniature configurations."""

import csv
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from opinionlab.cli import main

TINY_STUDY = {
    "scenario": {"kind": "dual", "factions": ["homophilic", "neophilic"], "n": 10,
                 "replicate_count": 3},
    "master_seed": 99,
    "steps": 120,
    "window_step": 40,
    "experiment": {"mode": "study", "resamples": 1000},
}

TINY_INTERVENTION = {
    "scenario": {"kind": "mixed", "n": 20, "replicate_count": 3},
    "master_seed": 41,
    "steps": 450,
    "window_step": 50,
    "experiment": {"mode": "intervention", "transitions": ["A->H", "H->C"], "t_stars": [100]},
}


def write_config(tmp_path, raw, out_name="out"):
    raw = dict(raw)
    raw["output_dir"] = str(tmp_path / out_name)
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(raw))
    return path, Path(raw["output_dir"])


def rows(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


class TestSimulate:
    def test_writes_profiles_and_bands(self, tmp_path):
        config, out = write_config(tmp_path, TINY_STUDY)
        assert main(["simulate", "--config", str(config)]) == 0
        profile_rows = rows(out / "profiles.csv")
        # 10 nodes x 3 replicates x 3 windows
        assert len(profile_rows) == 90
        assert {r["faction"] for r in profile_rows} == {"homophilic", "neophilic"}
        band_rows = rows(out / "bands.csv")
        assert len(band_rows) == 6
        assert (out / "run_meta.json").exists()

    def test_byte_reproducible_outputs(self, tmp_path):
        config, out = write_config(tmp_path, TINY_STUDY)
        assert main(["simulate", "--config", str(config)]) == 0
        first = {p.name: p.read_bytes() for p in out.glob("*.csv")}
        assert main(["simulate", "--config", str(config)]) == 0
        second = {p.name: p.read_bytes() for p in out.glob("*.csv")}
        assert first == second

    def test_seed_override_changes_outputs(self, tmp_path):
        config, out = write_config(tmp_path, TINY_STUDY)
        assert main(["simulate", "--config", str(config)]) == 0
        baseline = (out / "profiles.csv").read_bytes()
        assert main(["simulate", "--config", str(config), "--seed", "123"]) == 0
        assert (out / "profiles.csv").read_bytes() != baseline

    def test_replicates_override(self, tmp_path):
        config, out = write_config(tmp_path, TINY_STUDY)
        assert main(["simulate", "--config", str(config), "--replicates", "2"]) == 0
        assert len(rows(out / "profiles.csv")) == 60


class TestAnalyze:
    def test_reproduces_band_file_exactly(self, tmp_path):
        config, out = write_config(tmp_path, TINY_STUDY)
        assert main(["simulate", "--config", str(config)]) == 0
        original = (out / "bands.csv").read_bytes()
        (out / "bands.csv").unlink()
        assert main(["analyze", "--config", str(config)]) == 0
        assert (out / "bands.csv").read_bytes() == original

    def test_reproduces_effects_exactly(self, tmp_path):
        config, out = write_config(tmp_path, TINY_INTERVENTION)
        assert main(["intervene", "--config", str(config)]) == 0
        original = (out / "effects.csv").read_bytes()
        (out / "effects.csv").unlink()
        assert main(["analyze", "--config", str(config)]) == 0
        assert (out / "effects.csv").read_bytes() == original

    def test_missing_inputs_fail(self, tmp_path, capsys):
        config, out = write_config(tmp_path, TINY_STUDY, out_name="empty")
        assert main(["analyze", "--config", str(config)]) == 1
        assert "analyze needs" in capsys.readouterr().err


class TestIntervene:
    def test_writes_records_and_effects(self, tmp_path):
        config, out = write_config(tmp_path, TINY_INTERVENTION)
        assert main(["intervene", "--config", str(config)]) == 0
        record_rows = rows(out / "records.csv")
        assert {r["transition"] for r in record_rows} == {"A->H", "H->C"}
        assert {r["branch"] for r in record_rows} == {"baseline", "intervention"}
        effect_rows = rows(out / "effects.csv")
        assert len(effect_rows) == 2
        assert set(effect_rows[0]) == {
            "config_hash", "master_seed", "transition", "t_star", "n_runs", "delta_mean",
            "ci_half_width", "t_statistic", "p_value", "cohens_d", "stars",
        }

    def test_failure_removes_partial_outputs(self, tmp_path, capsys):
        raw = dict(TINY_INTERVENTION)
        raw["experiment"] = {**raw["experiment"], "tau": 0.5}  # nothing classifies
        config, out = write_config(tmp_path, raw)
        assert main(["intervene", "--config", str(config)]) == 1
        assert not (out / "records.csv").exists()
        assert not (out / "effects.csv").exists()
        assert "eligible" in capsys.readouterr().err


class TestSweep:
    def test_bin_width_sweep_layout(self, tmp_path):
        raw = dict(TINY_STUDY)
        raw["experiment"] = {"mode": "sweep", "sweep_axis": "bin_width",
                             "sweep_values": [0.5, 0.75], "resamples": 1000}
        config, out = write_config(tmp_path, raw)
        assert main(["sweep", "--config", str(config)]) == 0
        for tag in ("0.5", "0.75"):
            assert (out / f"bin_width={tag}" / "profiles.csv").exists()
            assert (out / f"bin_width={tag}" / "bands.csv").exists()

    def test_t_star_sweep_layout(self, tmp_path):
        raw = dict(TINY_INTERVENTION)
        raw["experiment"] = {"mode": "sweep", "sweep_axis": "t_star",
                             "sweep_values": [100, 150], "transitions": ["A->H"]}
        config, out = write_config(tmp_path, raw)
        assert main(["sweep", "--config", str(config)]) == 0
        for tag in ("100", "150"):
            assert (out / f"t_star={tag}" / "records.csv").exists()
            assert (out / f"t_star={tag}" / "effects.csv").exists()


class TestErrors:
    def test_bad_config_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text("scenario: {kind: nonsense}\nmaster_seed: 1\n")
        assert main(["simulate", "--config", str(path)]) == 1
        assert "error" in capsys.readouterr().err

    def test_unknown_key_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text("scenario: {kind: mixed}\nmaster_seed: 1\nbinwidth: 2\n")
        assert main(["simulate", "--config", str(path)]) == 1
        assert "binwidth" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["simulate", "--config", str(tmp_path / "none.yaml")]) == 1


def test_console_script_entry_point(tmp_path):
    raw = dict(TINY_STUDY)
    raw["scenario"] = {**raw["scenario"], "n": 6, "replicate_count": 2}
    raw["output_dir"] = str(tmp_path / "out")
    config = tmp_path / "config.yaml"
    config.write_text(yaml.safe_dump(raw))
    result = subprocess.run(
        [sys.executable, "-m", "opinionlab.cli", "simulate", "--config", str(config)],
        capture_output=True, text=True,
    )
    assert result.returncode == 0, result.stderr
    assert (tmp_path / "out" / "profiles.csv").exists()
