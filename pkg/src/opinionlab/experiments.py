"""Experiment orchestration: replicate studies, interventions and sweeps.

A scenario study simulates independently seeded replicate networks and
reduces each node's opinion trajectory to a complexity profile. The
intervention protocol snapshots a running network, reassigns one focal
node's behavior parameters and continues baseline and intervention
branches from the identical snapshot under identical noise realizations,
so any divergence is attributable to the parameter change alone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed

from . import seeds
from .complexity import ComplexityProfile, complexity_profile
from .model import BehaviorParams, ModelConstants, NetworkState, euler_step
from .scenarios import (
    FACTION_COLS,
    FACTIONS,
    PURE_KINDS,
    UNCLASSIFIED,
    ScenarioSpec,
    build_network,
    sample_faction_normal,
)

__all__ = [
    "DELTA_SEPARATION",
    "Snapshot",
    "SnapshotArchive",
    "ProfileRecord",
    "InterventionRecord",
    "ReplicateRun",
    "simulate_replicates",
    "simulate_with_snapshots",
    "continue_simulation",
    "profiles_from_runs",
    "run_scenario_study",
    "select_focal_nodes",
    "reassign_params",
    "run_intervention",
    "run_intervention_batch",
    "sweep",
]

log = logging.getLogger(__name__)

# post-intervention deltas average over windows ending at least this many
# steps after the intervention, keeping clear of the transient
DELTA_SEPARATION = 300


@dataclass(frozen=True)
class Snapshot:
    """Full network state at one step plus the noise-stream position marker."""

    state: NetworkState
    rng_state: dict


@dataclass
class SnapshotArchive:
    """Snapshots of one run keyed by the step they were taken at."""

    snapshots: dict[int, Snapshot] = field(default_factory=dict)

    def at(self, t_star: int) -> Snapshot:
        if t_star not in self.snapshots:
            raise KeyError(f"no snapshot stored at step {t_star}")
        return self.snapshots[t_star]


@dataclass(frozen=True)
class ReplicateRun:
    """Raw output of one replicate: trajectories plus node metadata."""

    replicate: int
    labels: list[str]
    params: np.ndarray
    trajectories: np.ndarray  # (n, steps + 1)


@dataclass(frozen=True)
class ProfileRecord:
    """Complexity profile of one node in one replicate."""

    replicate: int
    node: int
    faction: str
    profile: ComplexityProfile


@dataclass(frozen=True)
class InterventionRecord:
    """Paired baseline/intervention profiles of a focal node.

    ``delta`` is the mean nLZ shift (intervention minus baseline) over
    windows ending at least DELTA_SEPARATION steps after ``t_star``.
    """

    transition: tuple[str, str]
    t_star: int
    replicate: int
    focal_node: int
    baseline_profile: ComplexityProfile
    intervention_profile: ComplexityProfile
    delta: float

    def __post_init__(self):
        base, inter = self.baseline_profile, self.intervention_profile
        if not np.array_equal(base.window_ends, inter.window_ends):
            raise ValueError("baseline and intervention profiles must share window ends")
        expected = post_intervention_delta(base, inter, self.t_star)
        if expected != self.delta:
            raise ValueError(f"delta {self.delta} inconsistent with profiles ({expected})")


def post_intervention_delta(
    baseline: ComplexityProfile, intervention: ComplexityProfile, t_star: int
) -> float:
    """Mean nLZ shift over windows ending at or after t_star + DELTA_SEPARATION."""
    mask = baseline.window_ends >= t_star + DELTA_SEPARATION
    if not mask.any():
        raise ValueError(
            f"no windows end at or after step {t_star + DELTA_SEPARATION}; "
            "intervention too late for the configured windows"
        )
    return float(np.mean(intervention.nlz_values[mask] - baseline.nlz_values[mask]))


def simulate_with_snapshots(
    initial: NetworkState,
    constants: ModelConstants,
    steps: int,
    snapshot_steps: tuple[int, ...],
    rng: np.random.Generator,
) -> tuple[np.ndarray, SnapshotArchive]:
    """Run the dynamics recording opinions, snapshotting at the given steps.

    A snapshot taken at step t holds the state after t steps and the noise
    stream positioned to produce step t + 1, so continuing from it
    reproduces the uninterrupted run exactly.
    """
    for t in snapshot_steps:
        if not 0 <= t <= steps:
            raise ValueError(f"snapshot step {t} outside run range [0, {steps}]")
    wanted = set(snapshot_steps)
    archive = SnapshotArchive()
    trajectories = np.empty((initial.n, steps + 1), dtype=float)
    trajectories[:, 0] = initial.opinions
    state = initial
    if 0 in wanted:
        archive.snapshots[0] = Snapshot(state.copy(), seeds.generator_state(rng))
    for t in range(1, steps + 1):
        state = euler_step(state, constants, rng)
        trajectories[:, t] = state.opinions
        if t in wanted:
            archive.snapshots[t] = Snapshot(state.copy(), seeds.generator_state(rng))
    return trajectories, archive


def continue_simulation(
    snapshot: Snapshot,
    constants: ModelConstants,
    until_step: int,
    params_override: np.ndarray | None = None,
) -> np.ndarray:
    """Resume a run from a snapshot, returning opinions from its step onward.

    Column 0 of the result is the snapshot's own opinions. With
    ``params_override`` the branch runs under replaced behavior parameters
    while consuming the identical noise stream, which is the intervention
    branch of the causal protocol.
    """
    state = snapshot.state.copy()
    if params_override is not None:
        state = NetworkState(
            opinions=state.opinions,
            weights=state.weights,
            params=params_override,
            step=state.step,
        )
    if until_step < state.step:
        raise ValueError(f"cannot continue to step {until_step} before snapshot step {state.step}")
    rng = seeds.generator_from_state(snapshot.rng_state)
    remaining = until_step - state.step
    trajectories = np.empty((state.n, remaining + 1), dtype=float)
    trajectories[:, 0] = state.opinions
    for t in range(1, remaining + 1):
        state = euler_step(state, constants, rng)
        trajectories[:, t] = state.opinions
    return trajectories


def _simulate_one(
    spec: ScenarioSpec, constants: ModelConstants, steps: int, master_seed: int, rep: int
) -> ReplicateRun:
    state, labels = build_network(spec, seeds.derive_rng(master_seed, rep, seeds.INIT))
    noise_rng = seeds.derive_rng(master_seed, rep, seeds.NOISE)
    try:
        trajectories, _ = simulate_with_snapshots(state, constants, steps, (), noise_rng)
    except Exception as exc:
        raise RuntimeError(f"replicate {rep} failed: {exc}") from exc
    return ReplicateRun(replicate=rep, labels=labels, params=state.params, trajectories=trajectories)


def simulate_replicates(
    spec: ScenarioSpec,
    constants: ModelConstants,
    steps: int,
    master_seed: int,
    workers: int = 1,
) -> list[ReplicateRun]:
    """Simulate ``spec.replicate_count`` independently seeded networks."""
    reps = range(spec.replicate_count)
    if workers > 1:
        runs = Parallel(n_jobs=workers)(
            delayed(_simulate_one)(spec, constants, steps, master_seed, rep) for rep in reps
        )
    else:
        runs = [_simulate_one(spec, constants, steps, master_seed, rep) for rep in reps]
    return sorted(runs, key=lambda run: run.replicate)


def _classify_params(params: np.ndarray, tau: float) -> list[str]:
    """Dominance classification: strict largest coefficient exceeding tau."""
    labels = []
    for row in params:
        top = int(np.argmax(row))
        value = row[top]
        strict = np.sum(row == value) == 1
        if strict and value > tau:
            labels.append(FACTIONS[top])
        else:
            labels.append(UNCLASSIFIED)
    return labels


def select_focal_nodes(state: NetworkState, tau: float) -> dict[str, np.ndarray]:
    """Partition nodes by dominant behavioral disposition.

    A node belongs to a faction iff the matching coefficient is strictly
    the largest of its (h, a, c) and exceeds ``tau``; everything else is
    unclassified. Ties never classify.
    """
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    labels = np.array(_classify_params(state.params, tau))
    return {
        faction: np.flatnonzero(labels == faction)
        for faction in (*FACTIONS, UNCLASSIFIED)
    }


def reassign_params(
    target_faction: str, spec: ScenarioSpec, rng: np.random.Generator
) -> BehaviorParams:
    """Resample parameters enforcing strong dominance of the target behavior.

    Uses the pure-scenario sampling rule regardless of the spec's kind, so
    an intervention always produces an unambiguous behavioral regime
    independent of the node's prior values.
    """
    if target_faction not in FACTIONS:
        raise ValueError(f"target faction must be one of {FACTIONS}, got {target_faction!r}")
    return sample_faction_normal(spec, target_faction, rng)


def _study_labels(spec: ScenarioSpec, run: ReplicateRun, tau: float) -> list[str]:
    if spec.kind == "mixed":
        return _classify_params(run.params, tau)
    return run.labels


def profiles_from_runs(
    runs: list[ReplicateRun],
    bin_width: float,
    window_step: int,
    log_base: float = 2.0,
    labels_per_run: list[list[str]] | None = None,
) -> list[ProfileRecord]:
    """Per-node complexity profiles for already-simulated replicates."""
    records = []
    for idx, run in enumerate(runs):
        labels = labels_per_run[idx] if labels_per_run is not None else run.labels
        for node in range(run.trajectories.shape[0]):
            profile = complexity_profile(
                run.trajectories[node], bin_width, window_step, log_base, node=node
            )
            records.append(
                ProfileRecord(
                    replicate=run.replicate, node=node, faction=labels[node], profile=profile
                )
            )
    return records


def run_scenario_study(
    spec: ScenarioSpec,
    constants: ModelConstants,
    master_seed: int,
    *,
    steps: int = 3000,
    window_step: int = 300,
    bin_width: float = 0.75,
    log_base: float = 2.0,
    tau: float = 0.25,
    workers: int = 1,
) -> list[ProfileRecord]:
    """Replicate study: one complexity profile per node per replicate.

    Mixed-scenario nodes are labeled by dominance classification with
    threshold ``tau``; pure and dual nodes keep their construction labels.
    """
    runs = simulate_replicates(spec, constants, steps, master_seed, workers=workers)
    labels = [_study_labels(spec, run, tau) for run in runs]
    return profiles_from_runs(runs, bin_width, window_step, log_base, labels_per_run=labels)


def _eligible_nodes(spec: ScenarioSpec, run: ReplicateRun, from_faction: str, tau: float) -> np.ndarray:
    labels = np.array(_study_labels(spec, run, tau))
    return np.flatnonzero(labels == from_faction)


def _transition_key(transition: tuple[str, str]) -> tuple[int, int]:
    return FACTION_COLS[transition[0]], FACTION_COLS[transition[1]]


def run_intervention_batch(
    spec: ScenarioSpec,
    constants: ModelConstants,
    transitions: list[tuple[str, str]],
    t_stars: list[int],
    master_seed: int,
    *,
    steps: int = 3000,
    window_step: int = 300,
    bin_width: float = 0.75,
    log_base: float = 2.0,
    tau: float = 0.25,
    focal_count: int = 1,
    null_control: bool = False,
    workers: int = 1,
) -> list[InterventionRecord]:
    """Causal intervention experiment over every (transition, t_star) pair.

    Each replicate is simulated once with snapshots at every intervention
    time; the uninterrupted run doubles as the baseline continuation for
    every branch (verified equivalent by the snapshot-fidelity tests).
    With ``null_control`` the "intervention" keeps the focal node's own
    parameters, a control in which delta must vanish identically.
    """
    if not transitions:
        raise ValueError("at least one transition is required")
    if not t_stars:
        raise ValueError("at least one intervention time is required")
    for t_star in t_stars:
        if not 0 < t_star < steps:
            raise ValueError(f"t_star {t_star} must lie strictly inside (0, {steps})")
        if t_star + DELTA_SEPARATION > steps:
            raise ValueError(
                f"t_star {t_star} leaves no post-intervention window before step {steps}"
            )
    for faction_pair in transitions:
        for faction in faction_pair:
            if faction not in FACTIONS:
                raise ValueError(f"unknown faction {faction!r} in transition {faction_pair}")
        if spec.kind in PURE_KINDS and faction_pair[0] != PURE_KINDS[spec.kind]:
            raise ValueError(
                f"transition source {faction_pair[0]!r} absent from scenario {spec.kind!r}"
            )
        if spec.kind == "dual" and faction_pair[0] not in spec.factions:
            raise ValueError(
                f"transition source {faction_pair[0]!r} absent from scenario factions {spec.factions}"
            )
    if focal_count < 1:
        raise ValueError(f"focal_count must be >= 1, got {focal_count}")

    reps = range(spec.replicate_count)
    if workers > 1:
        per_rep = Parallel(n_jobs=workers)(
            delayed(_intervene_one)(
                spec, constants, transitions, t_stars, master_seed, rep,
                steps, window_step, bin_width, log_base, tau, focal_count, null_control,
            )
            for rep in reps
        )
    else:
        per_rep = [
            _intervene_one(
                spec, constants, transitions, t_stars, master_seed, rep,
                steps, window_step, bin_width, log_base, tau, focal_count, null_control,
            )
            for rep in reps
        ]

    records = [record for rep_records in per_rep for record in rep_records]
    for transition in transitions:
        for t_star in t_stars:
            if not any(r.transition == transition and r.t_star == t_star for r in records):
                raise RuntimeError(
                    f"every replicate lacked an eligible focal node for "
                    f"{transition[0]}->{transition[1]} at t*={t_star}"
                )
    return records


def _intervene_one(
    spec: ScenarioSpec,
    constants: ModelConstants,
    transitions: list[tuple[str, str]],
    t_stars: list[int],
    master_seed: int,
    rep: int,
    steps: int,
    window_step: int,
    bin_width: float,
    log_base: float,
    tau: float,
    focal_count: int,
    null_control: bool,
) -> list[InterventionRecord]:
    state, labels = build_network(spec, seeds.derive_rng(master_seed, rep, seeds.INIT))
    noise_rng = seeds.derive_rng(master_seed, rep, seeds.NOISE)
    trajectories, archive = simulate_with_snapshots(
        state, constants, steps, tuple(t_stars), noise_rng
    )
    run = ReplicateRun(replicate=rep, labels=labels, params=state.params, trajectories=trajectories)

    records = []
    for t_star in t_stars:
        snapshot = archive.at(t_star)
        for transition in transitions:
            from_faction, to_faction = transition
            eligible = _eligible_nodes(spec, run, from_faction, tau)
            if eligible.size == 0:
                log.warning(
                    "replicate %d: no %s node eligible for %s->%s at t*=%d; skipping",
                    rep, from_faction, from_faction, to_faction, t_star,
                )
                continue
            key = _transition_key(transition)
            focal_rng = seeds.derive_rng(master_seed, rep, seeds.FOCAL, t_star, *key)
            chosen = focal_rng.choice(eligible, size=min(focal_count, eligible.size), replace=False)
            for focal in np.sort(chosen):
                focal = int(focal)
                if null_control:
                    new_row = run.params[focal].copy()
                else:
                    new_row = reassign_params(to_faction, spec, focal_rng).as_array()
                branch_params = run.params.copy()
                branch_params[focal] = new_row
                branch = continue_simulation(
                    snapshot, constants, steps, params_override=branch_params
                )
                stitched = np.concatenate([trajectories[focal, :t_star], branch[focal]])
                baseline = complexity_profile(
                    trajectories[focal], bin_width, window_step, log_base, node=focal
                )
                intervention = complexity_profile(
                    stitched, bin_width, window_step, log_base, node=focal
                )
                records.append(
                    InterventionRecord(
                        transition=transition,
                        t_star=t_star,
                        replicate=rep,
                        focal_node=focal,
                        baseline_profile=baseline,
                        intervention_profile=intervention,
                        delta=post_intervention_delta(baseline, intervention, t_star),
                    )
                )
    return records


def run_intervention(
    spec: ScenarioSpec,
    constants: ModelConstants,
    transition: tuple[str, str],
    t_star: int,
    master_seed: int,
    **kwargs,
) -> list[InterventionRecord]:
    """Single-transition convenience wrapper around the batch runner."""
    return run_intervention_batch(spec, constants, [transition], [t_star], master_seed, **kwargs)


def sweep(
    axis: str,
    values: list,
    spec: ScenarioSpec,
    constants: ModelConstants,
    master_seed: int,
    *,
    steps: int = 3000,
    window_step: int = 300,
    bin_width: float = 0.75,
    log_base: float = 2.0,
    tau: float = 0.25,
    transitions: list[tuple[str, str]] | None = None,
    focal_count: int = 1,
    workers: int = 1,
) -> dict[str, list]:
    """Run the base study once per axis value, tagged by value.

    A bin-width sweep simulates the trajectories once and only re-bins
    them, which is exactly equivalent to full re-simulation because
    symbolization is analysis-side. A t_star sweep shares one simulation
    pass per replicate across all intervention times.
    """
    if not values:
        raise ValueError("sweep needs at least one value")
    if axis == "bin_width":
        runs = simulate_replicates(spec, constants, steps, master_seed, workers=workers)
        labels = [_study_labels(spec, run, tau) for run in runs]
        return {
            _tag(v): profiles_from_runs(runs, float(v), window_step, log_base, labels_per_run=labels)
            for v in values
        }
    if axis == "t_star":
        if transitions is None:
            raise ValueError("a t_star sweep needs transitions")
        records = run_intervention_batch(
            spec, constants, transitions, [int(v) for v in values], master_seed,
            steps=steps, window_step=window_step, bin_width=bin_width, log_base=log_base,
            tau=tau, focal_count=focal_count, workers=workers,
        )
        return {
            _tag(v): [r for r in records if r.t_star == int(v)] for v in values
        }
    if axis == "scenario":
        out = {}
        for value in values:
            swept = value if isinstance(value, ScenarioSpec) else _spec_for_kind(spec, value)
            out[swept.kind if isinstance(value, ScenarioSpec) else _tag(value)] = run_scenario_study(
                swept, constants, master_seed,
                steps=steps, window_step=window_step, bin_width=bin_width,
                log_base=log_base, tau=tau, workers=workers,
            )
        return out
    raise ValueError(f"unknown sweep axis {axis!r}; expected bin_width, t_star or scenario")


def _tag(value) -> str:
    return f"{value:g}" if isinstance(value, float) else str(value)


def _spec_for_kind(base: ScenarioSpec, kind: str) -> ScenarioSpec:
    return replace(base, kind=kind, factions=None)
