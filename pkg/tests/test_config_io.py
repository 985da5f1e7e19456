"""Config schema strictness and serialization round-trips."""

import numpy as np
import pytest
import yaml

from opinionlab import seeds
from opinionlab.config import (
    ALL_TRANSITIONS,
    ConfigError,
    config_from_dict,
    config_hash,
    config_to_dict,
    format_transition,
    load_config,
    parse_transition,
    save_config,
)
from opinionlab.io import (
    SnapshotIOError,
    fmt,
    read_bands_csv,
    read_intervention_csv,
    read_profiles_csv,
    read_snapshot,
    write_bands_csv,
    write_intervention_csv,
    write_profiles_csv,
    write_snapshot,
)
from opinionlab.model import ModelConstants, euler_step
from opinionlab.scenarios import ScenarioSpec, build_network

MINIMAL = {"scenario": {"kind": "pure-homophilic"}, "master_seed": 7}


class TestConfigLoading:
    def test_minimal_config_applies_reference_defaults(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text(yaml.safe_dump(MINIMAL))
        config = load_config(path)
        assert config.steps == 3000
        assert config.window_step == 300
        assert config.bin_width == 0.75
        assert config.log_base == 2.0
        assert config.scenario.n == 300
        assert config.scenario.replicate_count == 10
        assert config.constants.dt == 0.1
        assert config.constants.theta_h == 0.3
        assert config.constants.theta_a == 0.3
        assert config.experiment.tau == 0.25
        assert config.experiment.t_stars == (600,)
        assert config.experiment.mode == "study"

    def test_zero_bin_width_rejected(self):
        with pytest.raises(ConfigError, match="bin_width"):
            config_from_dict({**MINIMAL, "bin_width": 0})

    def test_unknown_key_rejected_by_name(self):
        with pytest.raises(ConfigError, match="binwidth"):
            config_from_dict({**MINIMAL, "binwidth": 0.5})

    def test_unknown_scenario_key_rejected(self):
        raw = {"scenario": {"kind": "mixed", "nodes": 10}, "master_seed": 1}
        with pytest.raises(ConfigError, match="scenario.nodes"):
            config_from_dict(raw)

    def test_missing_master_seed_rejected(self):
        with pytest.raises(ConfigError, match="master_seed"):
            config_from_dict({"scenario": {"kind": "mixed"}})

    def test_missing_scenario_rejected(self):
        with pytest.raises(ConfigError, match="scenario"):
            config_from_dict({"master_seed": 3})

    def test_out_of_range_value_names_field(self):
        with pytest.raises(ConfigError, match="dt"):
            config_from_dict({**MINIMAL, "constants": {"dt": -0.1}})

    def test_sweep_mode_requires_axis_and_values(self):
        with pytest.raises(ConfigError, match="sweep_axis"):
            config_from_dict({**MINIMAL, "experiment": {"mode": "sweep"}})

    def test_round_trip_idempotent(self, tmp_path):
        raw = {
            "scenario": {"kind": "dual", "factions": ["homophilic", "conformic"], "n": 24},
            "master_seed": 11,
            "constants": {"noise_sigma": 0.4},
            "experiment": {"mode": "intervention", "transitions": ["C->H"], "t_stars": [300]},
        }
        config = config_from_dict(raw)
        path = tmp_path / "full.yaml"
        save_config(config, path)
        reloaded = load_config(path)
        assert reloaded == config
        assert config_to_dict(reloaded) == config_to_dict(config)
        assert config_hash(reloaded) == config_hash(config)

    def test_hash_changes_with_content(self):
        a = config_from_dict(MINIMAL)
        b = config_from_dict({**MINIMAL, "master_seed": 8})
        assert config_hash(a) != config_hash(b)


class TestTransitionParsing:
    def test_code_form(self):
        assert parse_transition("A->H") == ("neophilic", "homophilic")
        assert parse_transition("h->c") == ("homophilic", "conformic")

    def test_pair_form(self):
        assert parse_transition(["conformic", "neophilic"]) == ("conformic", "neophilic")

    def test_formatting(self):
        for transition in ALL_TRANSITIONS:
            assert parse_transition(format_transition(transition)) == transition

    def test_bad_faction_rejected(self):
        with pytest.raises(ConfigError, match="skeptic"):
            parse_transition("skeptic->H")

    def test_malformed_rejected(self):
        with pytest.raises(ConfigError):
            parse_transition("A->H->C")


class TestFloatFormatting:
    def test_grid_of_doubles_round_trips(self):
        rng = np.random.default_rng(0)
        for value in rng.normal(0, 1, 200):
            assert float(fmt(value)) == value
        for value in (1e-300, 1.5127, np.pi, 2.0 / 3.0):
            assert float(fmt(value)) == value


class TestCsvRoundTrips:
    def test_profiles(self, tmp_path):
        from opinionlab.experiments import run_scenario_study

        spec = ScenarioSpec(kind="mixed", n=6, replicate_count=2)
        records = run_scenario_study(spec, ModelConstants(), 3, steps=60, window_step=30)
        path = tmp_path / "profiles.csv"
        write_profiles_csv(path, records, "abc123", 3)
        loaded, meta = read_profiles_csv(path)
        assert meta == {"config_hash": "abc123", "master_seed": 3}
        assert len(loaded) == len(records)
        for a, b in zip(loaded, sorted(records, key=lambda r: (r.replicate, r.node))):
            assert (a.replicate, a.node, a.faction) == (b.replicate, b.node, b.faction)
            assert np.array_equal(a.profile.nlz_values, b.profile.nlz_values)

    def test_bands(self, tmp_path):
        from opinionlab.stats import bootstrap_band

        trajectories = np.random.default_rng(1).normal(0.4, 0.05, size=(6, 3))
        band = bootstrap_band(trajectories, np.array([10, 20, 30]), "neophilic",
                              np.random.default_rng(2))
        path = tmp_path / "bands.csv"
        write_bands_csv(path, [band], "h", 1)
        loaded = read_bands_csv(path)
        assert len(loaded) == 1
        assert np.array_equal(loaded[0].mean, band.mean)
        assert np.array_equal(loaded[0].ci_low, band.ci_low)
        assert loaded[0].replicate_count == 6

    def test_intervention_records(self, tmp_path):
        from opinionlab.experiments import run_intervention

        spec = ScenarioSpec(kind="mixed", n=16, replicate_count=2)
        records = run_intervention(
            spec, ModelConstants(), ("neophilic", "conformic"), 100, 5,
            steps=450, window_step=50,
        )
        path = tmp_path / "records.csv"
        write_intervention_csv(path, records, "zz", 5)
        loaded, meta = read_intervention_csv(path)
        assert meta["master_seed"] == 5
        assert len(loaded) == len(records)
        for a, b in zip(loaded, records):
            assert a.transition == b.transition
            assert a.delta == b.delta
            assert np.array_equal(a.baseline_profile.nlz_values, b.baseline_profile.nlz_values)
            assert np.array_equal(
                a.intervention_profile.nlz_values, b.intervention_profile.nlz_values
            )

    def test_missing_branch_detected(self, tmp_path):
        path = tmp_path / "records.csv"
        header = ("config_hash,master_seed,transition,t_star,replicate,"
                  "focal_node,branch,window_end,nlz,delta\n")
        path.write_text(header + "x,1,A->H,60,0,3,baseline,90,0.5,0.1\n")
        with pytest.raises(ValueError, match="lacks intervention"):
            read_intervention_csv(path)


class TestSnapshotIO:
    def make_state(self):
        spec = ScenarioSpec(kind="mixed", n=9, replicate_count=1)
        state, _ = build_network(spec, seeds.derive_rng(1, 0, seeds.INIT))
        rng = seeds.derive_rng(1, 0, seeds.NOISE)
        for _ in range(7):
            state = euler_step(state, ModelConstants(), rng)
        return state, rng

    def test_round_trip_bit_identical(self, tmp_path):
        state, rng = self.make_state()
        marker = seeds.generator_state(rng)
        path = tmp_path / "state.snap"
        write_snapshot(path, state, marker)
        loaded, loaded_marker = read_snapshot(path)
        assert np.array_equal(loaded.opinions, state.opinions)
        assert np.array_equal(loaded.weights, state.weights)
        assert np.array_equal(loaded.params, state.params)
        assert loaded.step == state.step
        assert loaded_marker == marker
        # the restored stream continues identically
        a = seeds.generator_from_state(loaded_marker).normal(size=5)
        b = seeds.generator_from_state(marker).normal(size=5)
        assert np.array_equal(a, b)

    def test_resume_from_file_matches_uninterrupted(self, tmp_path):
        from opinionlab.experiments import Snapshot, continue_simulation, simulate_with_snapshots

        spec = ScenarioSpec(kind="mixed", n=9, replicate_count=1)
        state, _ = build_network(spec, seeds.derive_rng(4, 0, seeds.INIT))
        rng = seeds.derive_rng(4, 0, seeds.NOISE)
        full, archive = simulate_with_snapshots(state, ModelConstants(), 120, (40,), rng)
        snap = archive.at(40)
        path = tmp_path / "t40.snap"
        write_snapshot(path, snap.state, snap.rng_state)
        loaded_state, loaded_marker = read_snapshot(path)
        branch = continue_simulation(Snapshot(loaded_state, loaded_marker), ModelConstants(), 120)
        assert np.array_equal(branch, full[:, 40:])

    def test_truncation_detected(self, tmp_path):
        state, rng = self.make_state()
        path = tmp_path / "state.snap"
        write_snapshot(path, state, seeds.generator_state(rng))
        data = path.read_bytes()
        path.write_bytes(data[:-20])
        with pytest.raises(SnapshotIOError, match="truncated"):
            read_snapshot(path)

    def test_corruption_detected(self, tmp_path):
        state, rng = self.make_state()
        path = tmp_path / "state.snap"
        write_snapshot(path, state, seeds.generator_state(rng))
        data = bytearray(path.read_bytes())
        data[-30] ^= 0xFF
        path.write_bytes(bytes(data))
        with pytest.raises(SnapshotIOError, match="checksum"):
            read_snapshot(path)

    def test_version_mismatch_detected(self, tmp_path):
        import json

        state, rng = self.make_state()
        path = tmp_path / "state.snap"
        write_snapshot(path, state, seeds.generator_state(rng))
        header, _, payload = path.read_bytes().partition(b"\n")
        doc = json.loads(header)
        doc["version"] = 99
        path.write_bytes(json.dumps(doc).encode() + b"\n" + payload)
        with pytest.raises(SnapshotIOError, match="version"):
            read_snapshot(path)

    def test_not_a_snapshot_detected(self, tmp_path):
        path = tmp_path / "other.txt"
        path.write_text("just some text\n")
        with pytest.raises(SnapshotIOError):
            read_snapshot(path)
