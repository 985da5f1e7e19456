"""Command-line entry points: simulate, intervene, sweep, analyze.

Every command takes a YAML config plus optional overrides and writes the
delimited result families into the output directory, with a timestamped
JSON sidecar. Partial outputs are removed if a command fails, so an
output directory never holds a half-written result set.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import io as olio
from . import seeds
from .config import (
    ConfigError,
    RunConfig,
    config_hash,
    load_config,
)
from .experiments import (
    ProfileRecord,
    run_intervention_batch,
    run_scenario_study,
    sweep as run_sweep,
)
from .scenarios import FACTIONS, UNCLASSIFIED
from .stats import (
    DegenerateSampleError,
    bootstrap_band,
    faction_trajectories,
    replicate_means,
    summarize_effect,
)

log = logging.getLogger(__name__)

BOOTSTRAP_FACTION_SLOTS = {faction: i for i, faction in enumerate((*FACTIONS, UNCLASSIFIED))}


def bands_from_profiles(
    records: list[ProfileRecord], master_seed: int, resamples: int, confidence: float
):
    """Bootstrap one band per faction present in the records.

    The resampling stream is derived from (master_seed, faction slot), so
    recomputing bands from a stored profile file reproduces the original
    band file byte for byte.
    """
    means = replicate_means(records)
    ends = records[0].profile.window_ends
    bands = []
    for faction in sorted({faction for _, faction in means}):
        trajectories = faction_trajectories(means, faction)
        if trajectories.shape[0] < 2:
            log.warning("faction %s has a single replicate; band skipped", faction)
            continue
        rng = seeds.derive_rng(master_seed, 0, seeds.BOOTSTRAP, BOOTSTRAP_FACTION_SLOTS[faction])
        bands.append(
            bootstrap_band(
                trajectories, ends, faction, rng, resamples=resamples, confidence=confidence
            )
        )
    return bands


def effects_from_records(records, confidence: float):
    groups = sorted({(r.transition, r.t_star) for r in records})
    summaries = []
    for transition, t_star in groups:
        group = [r for r in records if r.transition == transition and r.t_star == t_star]
        summaries.append(summarize_effect(group, confidence=confidence))
    return summaries


class _OutputTracker:
    """Records files written by a command so failures can clean them up."""

    def __init__(self):
        self.paths: list[Path] = []

    def path(self, *parts) -> Path:
        p = Path(*parts)
        p.parent.mkdir(parents=True, exist_ok=True)
        self.paths.append(p)
        return p

    def discard_all(self):
        for p in self.paths:
            p.unlink(missing_ok=True)


def _study_outputs(config: RunConfig, out_dir: Path, tracker: _OutputTracker, workers: int,
                   records=None, subdir: str = ""):
    digest = config_hash(config)
    exp = config.experiment
    if records is None:
        records = run_scenario_study(
            config.scenario, config.constants, config.master_seed,
            steps=config.steps, window_step=config.window_step,
            bin_width=config.bin_width, log_base=config.log_base,
            tau=exp.tau, workers=workers,
        )
    base = out_dir / subdir if subdir else out_dir
    olio.write_profiles_csv(tracker.path(base, "profiles.csv"), records, digest, config.master_seed)
    bands = bands_from_profiles(records, config.master_seed, exp.resamples, exp.confidence)
    olio.write_bands_csv(tracker.path(base, "bands.csv"), bands, digest, config.master_seed)


def _intervention_outputs(config: RunConfig, out_dir: Path, tracker: _OutputTracker,
                          workers: int, t_stars=None, records=None, subdir: str = ""):
    digest = config_hash(config)
    exp = config.experiment
    if records is None:
        records = run_intervention_batch(
            config.scenario, config.constants, list(exp.transitions),
            list(t_stars if t_stars is not None else exp.t_stars), config.master_seed,
            steps=config.steps, window_step=config.window_step,
            bin_width=config.bin_width, log_base=config.log_base,
            tau=exp.tau, focal_count=exp.focal_count,
            null_control=exp.null_control, workers=workers,
        )
    base = out_dir / subdir if subdir else out_dir
    olio.write_intervention_csv(tracker.path(base, "records.csv"), records, digest, config.master_seed)
    summaries = effects_from_records(records, exp.confidence)
    olio.write_effects_csv(tracker.path(base, "effects.csv"), summaries, digest, config.master_seed)


def cmd_simulate(config: RunConfig, out_dir: Path, tracker: _OutputTracker, workers: int) -> None:
    _study_outputs(config, out_dir, tracker, workers)
    olio.write_run_meta(tracker.path(out_dir, "run_meta.json"), config, {"command": "simulate"})


def cmd_intervene(config: RunConfig, out_dir: Path, tracker: _OutputTracker, workers: int) -> None:
    _intervention_outputs(config, out_dir, tracker, workers)
    olio.write_run_meta(tracker.path(out_dir, "run_meta.json"), config, {"command": "intervene"})


def cmd_sweep(config: RunConfig, out_dir: Path, tracker: _OutputTracker, workers: int) -> None:
    exp = config.experiment
    axis, values = exp.sweep_axis, list(exp.sweep_values)
    tagged = run_sweep(
        axis, values, config.scenario, config.constants, config.master_seed,
        steps=config.steps, window_step=config.window_step, bin_width=config.bin_width,
        log_base=config.log_base, tau=exp.tau, transitions=list(exp.transitions),
        focal_count=exp.focal_count, workers=workers,
    )
    for tag, outputs in tagged.items():
        subdir = f"{axis}={tag}"
        if axis == "t_star":
            sub_config = config
            _intervention_outputs(sub_config, out_dir, tracker, workers,
                                  records=outputs, subdir=subdir)
        else:
            sub_config = config if axis != "bin_width" else replace(config, bin_width=float(tag))
            _study_outputs(sub_config, out_dir, tracker, workers, records=outputs, subdir=subdir)
    olio.write_run_meta(tracker.path(out_dir, "run_meta.json"), config,
                        {"command": "sweep", "axis": axis, "values": [str(v) for v in values]})


def cmd_analyze(config: RunConfig, out_dir: Path, tracker: _OutputTracker, workers: int) -> None:
    """Recompute bands/effects from stored CSVs without re-simulating."""
    exp = config.experiment
    profiles_path = out_dir / "profiles.csv"
    records_path = out_dir / "records.csv"
    if not profiles_path.exists() and not records_path.exists():
        raise FileNotFoundError(
            f"analyze needs {profiles_path} or {records_path}; run simulate or intervene first"
        )
    if profiles_path.exists():
        records, meta = olio.read_profiles_csv(profiles_path)
        bands = bands_from_profiles(records, meta["master_seed"], exp.resamples, exp.confidence)
        olio.write_bands_csv(tracker.path(out_dir, "bands.csv"), bands,
                             meta["config_hash"], meta["master_seed"])
    if records_path.exists():
        records, meta = olio.read_intervention_csv(records_path)
        summaries = effects_from_records(records, exp.confidence)
        olio.write_effects_csv(tracker.path(out_dir, "effects.csv"), summaries,
                               meta["config_hash"], meta["master_seed"])


COMMANDS = {
    "simulate": cmd_simulate,
    "intervene": cmd_intervene,
    "sweep": cmd_sweep,
    "analyze": cmd_analyze,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opinionlab",
        description="Adaptive social-network simulation lab with opinion-complexity analysis",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "replicate scenario study: profiles.csv + bands.csv"),
        ("intervene", "causal intervention experiment: records.csv + effects.csv"),
        ("sweep", "repeat the base study along one axis into tagged subdirectories"),
        ("analyze", "recompute bands/effects from stored CSVs without simulating"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="YAML run configuration")
        cmd.add_argument("--seed", type=int, default=None, help="override master_seed")
        cmd.add_argument("--out", default=None, help="override output directory")
        cmd.add_argument("--replicates", type=int, default=None, help="override replicate count")
        cmd.add_argument("--threads", type=int, default=1, help="parallel replicate workers")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = replace(config, master_seed=args.seed)
        if args.replicates is not None:
            config = replace(config, scenario=config.scenario.with_replicates(args.replicates))
        if args.out is not None:
            config = replace(config, output_dir=args.out)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    out_dir = Path(config.output_dir)
    tracker = _OutputTracker()
    try:
        COMMANDS[args.command](config, out_dir, tracker, max(1, args.threads))
    except Exception as exc:
        tracker.discard_all()
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in tracker.paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
