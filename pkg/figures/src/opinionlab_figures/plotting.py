"""Figure rendering: faction band panels and intervention comparisons."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import (
    BAND_DUMP_COLUMNS,
    RECORD_DUMP_COLUMNS,
    BandFile,
    RecordFile,
    SchemaError,
    dump_rows,
    read_band_file,
    read_record_file,
)

# baseline/homophilic blue, intervention/neophilic orange, conformic green
DEFAULT_COLORS = {
    "homophilic": "tab:blue",
    "neophilic": "tab:orange",
    "conformic": "tab:green",
    "unclassified": "tab:gray",
    "baseline": "tab:blue",
    "intervention": "tab:orange",
}


@dataclass
class FigureSpec:
    """Layout and styling for one rendered figure."""

    inputs: list[str]
    output: str
    layout: tuple[int, int] | None = None  # (rows, cols); inferred when None
    same_scale: bool = False
    colors: dict[str, str] = field(default_factory=dict)
    dump: str | None = None  # re-emit plotted values to this CSV

    def color(self, key: str) -> str:
        return self.colors.get(key, DEFAULT_COLORS.get(key, "tab:purple"))


def _grid(spec: FigureSpec, panel_count: int) -> tuple[int, int]:
    if spec.layout is not None:
        rows, cols = spec.layout
        if rows * cols < panel_count:
            raise ValueError(f"layout {rows}x{cols} too small for {panel_count} panels")
        return rows, cols
    if panel_count <= 3:
        return 1, panel_count
    cols = 2
    return math.ceil(panel_count / cols), cols


def _finish(fig, axes, spec: FigureSpec, panel_count: int):
    for ax in axes[panel_count:]:
        ax.set_visible(False)
    if spec.same_scale:
        low = min(ax.get_ylim()[0] for ax in axes[:panel_count])
        high = max(ax.get_ylim()[1] for ax in axes[:panel_count])
        for ax in axes[:panel_count]:
            ax.set_ylim(low, high)
    fig.tight_layout()
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def plot_bands(spec: FigureSpec) -> Path:
    """One panel per band file: shaded band plus mean line per faction."""
    if not spec.inputs:
        raise ValueError("no input band files")
    files: list[BandFile] = [read_band_file(p) for p in spec.inputs]
    rows, cols = _grid(spec, len(files))
    fig, axes_grid = plt.subplots(rows, cols, figsize=(4.2 * cols, 3.4 * rows), squeeze=False)
    axes = axes_grid.ravel()
    for ax, band_file in zip(axes, files):
        for series in band_file.series:
            color = spec.color(series.faction)
            ax.fill_between(series.window_ends, series.ci_low, series.ci_high,
                            color=color, alpha=0.25, linewidth=0)
            ax.plot(series.window_ends, series.mean, color=color, label=series.faction)
        ax.set_title(band_file.path.stem)
        ax.set_xlabel("t")
        ax.set_ylabel("nLZ")
        ax.legend(fontsize="small")
    out = _finish(fig, axes, spec, len(files))
    if spec.dump:
        dump_rows([r for f in files for r in f.raw_rows], BAND_DUMP_COLUMNS, spec.dump)
    return out


def _branch_band(series_list):
    """Mean and 95% t-interval across records at each window."""
    ends = series_list[0].window_ends
    for s in series_list:
        if s.window_ends != ends:
            raise SchemaError("records disagree on window grids")
    values = np.array([s.nlz for s in series_list])
    mean = values.mean(axis=0)
    n = values.shape[0]
    if n > 1:
        from scipy import stats as sps

        half = sps.t.ppf(0.975, df=n - 1) * values.std(axis=0, ddof=1) / math.sqrt(n)
    else:
        half = np.zeros_like(mean)
    return ends, mean, half


def plot_intervention(spec: FigureSpec) -> Path:
    """Per-transition panels comparing baseline and intervention curves."""
    if not spec.inputs:
        raise ValueError("no input record files")
    files: list[RecordFile] = [read_record_file(p) for p in spec.inputs]
    series = [s for f in files for s in f.series]
    panels = sorted({(s.transition, s.t_star) for s in series})
    rows, cols = _grid(spec, len(panels))
    fig, axes_grid = plt.subplots(rows, cols, figsize=(4.2 * cols, 3.2 * rows), squeeze=False)
    axes = axes_grid.ravel()
    for ax, (transition, t_star) in zip(axes, panels):
        for branch in ("baseline", "intervention"):
            group = [
                s for s in series
                if s.transition == transition and s.t_star == t_star and s.branch == branch
            ]
            if not group:
                raise SchemaError(
                    f"transition {transition} at t*={t_star} lacks {branch} series"
                )
            ends, mean, half = _branch_band(group)
            color = spec.color(branch)
            ax.fill_between(ends, mean - half, mean + half, color=color, alpha=0.25, linewidth=0)
            ax.plot(ends, mean, color=color, label=branch)
        ax.axvline(t_star, color="black", linestyle="--", linewidth=0.8)
        ax.set_title(f"{transition} (t*={t_star})")
        ax.set_xlabel("t")
        ax.set_ylabel("nLZ")
        ax.legend(fontsize="small")
    out = _finish(fig, axes, spec, len(panels))
    if spec.dump:
        dump_rows([r for f in files for r in f.raw_rows], RECORD_DUMP_COLUMNS, spec.dump)
    return out
