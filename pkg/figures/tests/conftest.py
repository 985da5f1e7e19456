"""Shared fixtures: real opinionlab outputs plus synthetic CSVs."""

import csv
import subprocess
import sys

import pytest
import yaml

BAND_COLUMNS = [
    "config_hash", "master_seed", "faction", "window_end",
    "mean", "ci_low", "ci_high", "replicate_count",
]
RECORD_COLUMNS = [
    "config_hash", "master_seed", "transition", "t_star", "replicate",
    "focal_node", "branch", "window_end", "nlz", "delta",
]


def run_opinionlab(args):
    result = subprocess.run(
        [sys.executable, "-m", "opinionlab.cli", *args], capture_output=True, text=True
    )
    assert result.returncode == 0, result.stderr
    return result


@pytest.fixture(scope="session")
def study_outputs(tmp_path_factory):
    """Three tiny pure-scenario studies produced by the real CLI."""
    root = tmp_path_factory.mktemp("studies")
    band_files = []
    for kind in ("pure-homophilic", "pure-neophilic", "pure-conformic"):
        out = root / kind
        config = root / f"{kind}.yaml"
        config.write_text(yaml.safe_dump({
            "scenario": {"kind": kind, "n": 8, "replicate_count": 3},
            "master_seed": 5,
            "steps": 120,
            "window_step": 40,
            "experiment": {"mode": "study", "resamples": 1000},
            "output_dir": str(out),
        }))
        run_opinionlab(["simulate", "--config", str(config)])
        band_files.append(out / "bands.csv")
    return band_files


@pytest.fixture(scope="session")
def intervention_outputs(tmp_path_factory):
    """A six-transition records file produced by the real CLI."""
    root = tmp_path_factory.mktemp("intervention")
    out = root / "out"
    config = root / "run.yaml"
    config.write_text(yaml.safe_dump({
        "scenario": {"kind": "mixed", "n": 24, "replicate_count": 3},
        "master_seed": 12,
        "steps": 450,
        "window_step": 50,
        "experiment": {"mode": "intervention", "t_stars": [100]},
        "output_dir": str(out),
    }))
    run_opinionlab(["intervene", "--config", str(config)])
    return out / "records.csv"


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        writer.writerows(rows)
    return path


@pytest.fixture
def synthetic_bands(tmp_path):
    rows = []
    for faction, base in (("homophilic", 0.5), ("neophilic", 0.4)):
        for i, end in enumerate((100, 200, 300)):
            mid = base + 0.01 * i
            rows.append(["h", 1, faction, end, mid, mid - 0.02, mid + 0.02, 4])
    return write_csv(tmp_path / "bands.csv", BAND_COLUMNS, rows)


@pytest.fixture
def synthetic_records(tmp_path):
    rows = []
    for branch, offset in (("baseline", 0.0), ("intervention", 0.05)):
        for rep in (0, 1):
            for end in (100, 200, 300):
                rows.append(
                    ["h", 1, "A->H", 100, rep, 3 + rep, branch, end,
                     0.4 + offset + 0.001 * rep, 0.05]
                )
    return write_csv(tmp_path / "records.csv", RECORD_COLUMNS, rows)
