"""Readers for the opinionlab CSV families.

Values are kept as the original strings alongside parsed floats so the
dump mode can re-emit exactly what was read; plotting never rewrites a
number.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

BAND_COLUMNS = [
    "config_hash", "master_seed", "faction", "window_end",
    "mean", "ci_low", "ci_high", "replicate_count",
]
RECORD_COLUMNS = [
    "config_hash", "master_seed", "transition", "t_star", "replicate",
    "focal_node", "branch", "window_end", "nlz", "delta",
]

BAND_DUMP_COLUMNS = ["faction", "window_end", "mean", "ci_low", "ci_high"]
RECORD_DUMP_COLUMNS = [
    "transition", "t_star", "replicate", "focal_node", "branch", "window_end", "nlz",
]


class SchemaError(ValueError):
    """Input file does not match the documented CSV schema."""


@dataclass
class BandSeries:
    """One faction's mean trajectory with confidence bounds."""

    faction: str
    window_ends: list[int]
    mean: list[float]
    ci_low: list[float]
    ci_high: list[float]


@dataclass
class BandFile:
    path: Path
    series: list[BandSeries]
    raw_rows: list[dict] = field(repr=False, default_factory=list)


@dataclass
class BranchSeries:
    """One focal node's nLZ profile for one branch of one record."""

    transition: str
    t_star: int
    replicate: int
    focal_node: int
    branch: str
    window_ends: list[int]
    nlz: list[float]


@dataclass
class RecordFile:
    path: Path
    series: list[BranchSeries]
    raw_rows: list[dict] = field(repr=False, default_factory=list)


def _read_rows(path: str | Path, columns: list[str]) -> list[dict]:
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != columns:
            raise SchemaError(
                f"{path}: expected columns {columns}, found {reader.fieldnames}"
            )
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def read_band_file(path: str | Path) -> BandFile:
    """Parse a bands CSV; all factions must share one window grid."""
    rows = _read_rows(path, BAND_COLUMNS)
    grouped: dict[str, list[dict]] = {}
    for row in rows:
        grouped.setdefault(row["faction"], []).append(row)
    series = []
    for faction in sorted(grouped):
        group = grouped[faction]
        series.append(
            BandSeries(
                faction=faction,
                window_ends=[int(r["window_end"]) for r in group],
                mean=[float(r["mean"]) for r in group],
                ci_low=[float(r["ci_low"]) for r in group],
                ci_high=[float(r["ci_high"]) for r in group],
            )
        )
    grids = {tuple(s.window_ends) for s in series}
    if len(grids) > 1:
        raise SchemaError(f"{path}: factions disagree on window grids: {sorted(grids)}")
    return BandFile(path=Path(path), series=series, raw_rows=rows)


def read_record_file(path: str | Path) -> RecordFile:
    """Parse an intervention records CSV into per-branch series."""
    rows = _read_rows(path, RECORD_COLUMNS)
    grouped: dict[tuple, list[dict]] = {}
    for row in rows:
        key = (row["transition"], int(row["t_star"]), int(row["replicate"]),
               int(row["focal_node"]), row["branch"])
        grouped.setdefault(key, []).append(row)
    series = []
    for (transition, t_star, replicate, focal, branch), group in sorted(grouped.items()):
        series.append(
            BranchSeries(
                transition=transition,
                t_star=t_star,
                replicate=replicate,
                focal_node=focal,
                branch=branch,
                window_ends=[int(r["window_end"]) for r in group],
                nlz=[float(r["nlz"]) for r in group],
            )
        )
    return RecordFile(path=Path(path), series=series, raw_rows=rows)


def dump_rows(rows: list[dict], columns: list[str], path: str | Path) -> None:
    """Re-emit the consumed values verbatim for diffing against inputs."""
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([row[c] for c in columns])
