"""Serialization: result CSV families, state snapshots and run metadata.

Three delimited families cover every result: profiles (one row per node
per window), bands (faction means with bootstrap bounds) and effects
(one row per transition). Numeric fields carry 17 significant digits so
parsing them back reproduces the exact doubles. Timestamps live only in
the JSON sidecar, keeping the CSVs byte-reproducible from (config, seed).
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import time
from pathlib import Path

import numpy as np

from .complexity import ComplexityProfile
from .config import RunConfig, config_hash, config_to_dict, format_transition, parse_transition
from .experiments import InterventionRecord, ProfileRecord
from .model import NetworkState
from .stats import EffectSummary, TrajectoryBand

__all__ = [
    "SnapshotIOError",
    "fmt",
    "write_profiles_csv",
    "read_profiles_csv",
    "write_bands_csv",
    "read_bands_csv",
    "write_intervention_csv",
    "read_intervention_csv",
    "write_effects_csv",
    "write_snapshot",
    "read_snapshot",
    "write_run_meta",
]

PROFILE_COLUMNS = ["config_hash", "master_seed", "replicate", "node", "faction", "window_end", "nlz"]
BAND_COLUMNS = [
    "config_hash", "master_seed", "faction", "window_end",
    "mean", "ci_low", "ci_high", "replicate_count",
]
RECORD_COLUMNS = [
    "config_hash", "master_seed", "transition", "t_star", "replicate",
    "focal_node", "branch", "window_end", "nlz", "delta",
]
EFFECT_COLUMNS = [
    "config_hash", "master_seed", "transition", "t_star", "n_runs",
    "delta_mean", "ci_half_width", "t_statistic", "p_value", "cohens_d", "stars",
]

SNAPSHOT_MAGIC = "opinionlab.snapshot"
SNAPSHOT_VERSION = 1


class SnapshotIOError(RuntimeError):
    """Snapshot file is unreadable: bad magic, version, truncation or checksum."""


def fmt(value: float) -> str:
    """17-significant-digit decimal form; round-trips any double exactly."""
    return format(float(value), ".17g")


def _write_rows(path: Path, columns: list[str], rows) -> None:
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        writer.writerows(rows)


def write_profiles_csv(
    path: str | Path, records: list[ProfileRecord], config_digest: str, master_seed: int
) -> None:
    rows = []
    for record in sorted(records, key=lambda r: (r.replicate, r.node)):
        for end, nlz in zip(record.profile.window_ends, record.profile.nlz_values):
            rows.append(
                [config_digest, master_seed, record.replicate, record.node,
                 record.faction, int(end), fmt(nlz)]
            )
    _write_rows(Path(path), PROFILE_COLUMNS, rows)


def read_profiles_csv(path: str | Path) -> tuple[list[ProfileRecord], dict]:
    """Rebuild profile records; returns (records, file metadata)."""
    groups: dict[tuple[int, int], dict] = {}
    meta = {}
    with Path(path).open(newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != PROFILE_COLUMNS:
            raise ValueError(f"{path}: expected columns {PROFILE_COLUMNS}, got {reader.fieldnames}")
        for row in reader:
            meta = {"config_hash": row["config_hash"], "master_seed": int(row["master_seed"])}
            key = (int(row["replicate"]), int(row["node"]))
            group = groups.setdefault(key, {"faction": row["faction"], "ends": [], "values": []})
            group["ends"].append(int(row["window_end"]))
            group["values"].append(float(row["nlz"]))
    records = []
    for (replicate, node), group in sorted(groups.items()):
        profile = ComplexityProfile(
            node=node, window_ends=np.array(group["ends"]), nlz_values=np.array(group["values"])
        )
        records.append(
            ProfileRecord(replicate=replicate, node=node, faction=group["faction"], profile=profile)
        )
    if not records:
        raise ValueError(f"{path}: no profile rows")
    return records, meta


def write_bands_csv(
    path: str | Path, bands: list[TrajectoryBand], config_digest: str, master_seed: int
) -> None:
    rows = []
    for band in sorted(bands, key=lambda b: b.faction):
        for i, end in enumerate(band.window_ends):
            rows.append(
                [config_digest, master_seed, band.faction, int(end),
                 fmt(band.mean[i]), fmt(band.ci_low[i]), fmt(band.ci_high[i]),
                 band.replicate_count]
            )
    _write_rows(Path(path), BAND_COLUMNS, rows)


def read_bands_csv(path: str | Path) -> list[TrajectoryBand]:
    groups: dict[str, dict] = {}
    with Path(path).open(newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != BAND_COLUMNS:
            raise ValueError(f"{path}: expected columns {BAND_COLUMNS}, got {reader.fieldnames}")
        for row in reader:
            group = groups.setdefault(
                row["faction"],
                {"ends": [], "mean": [], "low": [], "high": [], "count": int(row["replicate_count"])},
            )
            group["ends"].append(int(row["window_end"]))
            group["mean"].append(float(row["mean"]))
            group["low"].append(float(row["ci_low"]))
            group["high"].append(float(row["ci_high"]))
    return [
        TrajectoryBand(
            faction=faction,
            window_ends=np.array(group["ends"]),
            mean=np.array(group["mean"]),
            ci_low=np.array(group["low"]),
            ci_high=np.array(group["high"]),
            replicate_count=group["count"],
        )
        for faction, group in sorted(groups.items())
    ]


def write_intervention_csv(
    path: str | Path, records: list[InterventionRecord], config_digest: str, master_seed: int
) -> None:
    rows = []
    ordered = sorted(records, key=lambda r: (r.transition, r.t_star, r.replicate, r.focal_node))
    for record in ordered:
        label = format_transition(record.transition)
        for branch, profile in (
            ("baseline", record.baseline_profile),
            ("intervention", record.intervention_profile),
        ):
            for end, nlz in zip(profile.window_ends, profile.nlz_values):
                rows.append(
                    [config_digest, master_seed, label, record.t_star, record.replicate,
                     record.focal_node, branch, int(end), fmt(nlz), fmt(record.delta)]
                )
    _write_rows(Path(path), RECORD_COLUMNS, rows)


def read_intervention_csv(path: str | Path) -> tuple[list[InterventionRecord], dict]:
    groups: dict[tuple, dict] = {}
    meta = {}
    with Path(path).open(newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != RECORD_COLUMNS:
            raise ValueError(f"{path}: expected columns {RECORD_COLUMNS}, got {reader.fieldnames}")
        for row in reader:
            meta = {"config_hash": row["config_hash"], "master_seed": int(row["master_seed"])}
            key = (row["transition"], int(row["t_star"]), int(row["replicate"]), int(row["focal_node"]))
            group = groups.setdefault(key, {"delta": float(row["delta"]), "branches": {}})
            branch = group["branches"].setdefault(row["branch"], {"ends": [], "values": []})
            branch["ends"].append(int(row["window_end"]))
            branch["values"].append(float(row["nlz"]))
    records = []
    for (label, t_star, replicate, focal), group in sorted(groups.items()):
        profiles = {}
        for name in ("baseline", "intervention"):
            if name not in group["branches"]:
                raise ValueError(f"{path}: record {label} t*={t_star} rep={replicate} lacks {name} rows")
            branch = group["branches"][name]
            profiles[name] = ComplexityProfile(
                node=focal, window_ends=np.array(branch["ends"]), nlz_values=np.array(branch["values"])
            )
        records.append(
            InterventionRecord(
                transition=parse_transition(label),
                t_star=t_star,
                replicate=replicate,
                focal_node=focal,
                baseline_profile=profiles["baseline"],
                intervention_profile=profiles["intervention"],
                delta=group["delta"],
            )
        )
    if not records:
        raise ValueError(f"{path}: no intervention rows")
    return records, meta


def write_effects_csv(
    path: str | Path, summaries: list[EffectSummary], config_digest: str, master_seed: int
) -> None:
    rows = []
    for s in sorted(summaries, key=lambda s: (format_transition(s.transition), s.t_star)):
        rows.append(
            [config_digest, master_seed, format_transition(s.transition), s.t_star, s.n_runs,
             fmt(s.delta_mean), fmt(s.ci_half_width), fmt(s.t_statistic), fmt(s.p_value),
             fmt(s.cohens_d), s.stars]
        )
    _write_rows(Path(path), EFFECT_COLUMNS, rows)


def write_snapshot(path: str | Path, state: NetworkState, rng_state: dict) -> None:
    """Write a lossless state snapshot with an integrity checksum.

    Layout: one JSON header line (magic, version, payload length and
    sha256), then an npz payload holding the arrays, step and the
    serialized rng position marker.
    """
    buffer = _io.BytesIO()
    np.savez(
        buffer,
        opinions=state.opinions,
        weights=state.weights,
        params=state.params,
        step=np.int64(state.step),
        rng_state=np.frombuffer(json.dumps(rng_state).encode(), dtype=np.uint8),
    )
    payload = buffer.getvalue()
    header = {
        "magic": SNAPSHOT_MAGIC,
        "version": SNAPSHOT_VERSION,
        "payload_len": len(payload),
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    with Path(path).open("wb") as handle:
        handle.write(json.dumps(header).encode() + b"\n")
        handle.write(payload)


def read_snapshot(path: str | Path) -> tuple[NetworkState, dict]:
    """Read a snapshot, verifying magic, version, length and checksum."""
    with Path(path).open("rb") as handle:
        header_line = handle.readline()
        payload = handle.read()
    try:
        header = json.loads(header_line)
    except json.JSONDecodeError as exc:
        raise SnapshotIOError(f"{path}: missing or corrupt snapshot header") from exc
    if header.get("magic") != SNAPSHOT_MAGIC:
        raise SnapshotIOError(f"{path}: not a snapshot file")
    if header.get("version") != SNAPSHOT_VERSION:
        raise SnapshotIOError(
            f"{path}: snapshot version {header.get('version')} unsupported "
            f"(expected {SNAPSHOT_VERSION})"
        )
    if len(payload) != header.get("payload_len"):
        raise SnapshotIOError(
            f"{path}: truncated payload ({len(payload)} of {header.get('payload_len')} bytes)"
        )
    if hashlib.sha256(payload).hexdigest() != header.get("payload_sha256"):
        raise SnapshotIOError(f"{path}: payload checksum mismatch")
    data = np.load(_io.BytesIO(payload))
    rng_state = json.loads(bytes(data["rng_state"]).decode())
    state = NetworkState(
        opinions=data["opinions"],
        weights=data["weights"],
        params=data["params"],
        step=int(data["step"]),
    )
    return state, rng_state


def write_run_meta(path: str | Path, config: RunConfig, extra: dict | None = None) -> None:
    """Timestamped sidecar; the only output allowed to differ across reruns."""
    meta = {
        "config": config_to_dict(config),
        "config_hash": config_hash(config),
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if extra:
        meta.update(extra)
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
