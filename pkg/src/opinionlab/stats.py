"""Statistical layer: bootstrap bands, t-tests, effect sizes, star notation.

Faction-mean nLZ trajectories get percentile-bootstrap confidence bands
resampled at the replicate level; intervention deltas get one-sample
t-tests against zero, Student-t confidence intervals and Cohen's d, with
significance rendered as one star per decade below p = 1e-2.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .experiments import InterventionRecord, ProfileRecord

__all__ = [
    "TrajectoryBand",
    "EffectSummary",
    "DegenerateSampleError",
    "replicate_means",
    "bootstrap_band",
    "one_sample_t",
    "cohens_d",
    "stars_for_p",
    "run_deltas",
    "summarize_effect",
]

log = logging.getLogger(__name__)

MAX_STARS = 16  # p-values underflowing to zero render at this depth


class DegenerateSampleError(ValueError):
    """Sample has too few observations or zero variance for the statistic."""


@dataclass(frozen=True)
class TrajectoryBand:
    """Faction-mean nLZ trajectory with bootstrap confidence bounds."""

    faction: str
    window_ends: np.ndarray
    mean: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    replicate_count: int

    def __post_init__(self):
        for name in ("window_ends", "mean", "ci_low", "ci_high"):
            object.__setattr__(self, name, np.asarray(getattr(self, name)))
        if not (self.window_ends.shape == self.mean.shape == self.ci_low.shape == self.ci_high.shape):
            raise ValueError("band arrays must be aligned")
        if np.any(self.ci_low > self.mean) or np.any(self.mean > self.ci_high):
            raise ValueError("band must satisfy ci_low <= mean <= ci_high at every window")


@dataclass(frozen=True)
class EffectSummary:
    """Aggregate of per-run intervention deltas for one transition."""

    transition: tuple[str, str]
    t_star: int
    n_runs: int
    delta_mean: float
    ci_half_width: float
    t_statistic: float
    p_value: float
    cohens_d: float
    stars: str

    def __post_init__(self):
        if self.stars != stars_for_p(self.p_value):
            raise ValueError(f"stars {self.stars!r} inconsistent with p={self.p_value}")


def replicate_means(records: list[ProfileRecord]) -> dict[tuple[int, str], np.ndarray]:
    """Faction-mean nLZ trajectory of every (replicate, faction) group.

    Node profiles are averaged unweighted at each window end. Replicates
    with no node of a faction contribute nothing for that faction (logged);
    window grids must agree across all records.
    """
    if not records:
        raise ValueError("no profile records supplied")
    ends = records[0].profile.window_ends
    groups: dict[tuple[int, str], list[np.ndarray]] = {}
    for record in records:
        if not np.array_equal(record.profile.window_ends, ends):
            raise ValueError("profile records disagree on window ends")
        groups.setdefault((record.replicate, record.faction), []).append(record.profile.nlz_values)
    means = {key: np.mean(np.stack(values), axis=0) for key, values in sorted(groups.items())}
    replicates = {rep for rep, _ in means}
    factions = {faction for _, faction in means}
    for rep in sorted(replicates):
        for faction in sorted(factions):
            if (rep, faction) not in means:
                log.warning("replicate %d has no %s nodes; group omitted", rep, faction)
    return means


def faction_trajectories(
    means: dict[tuple[int, str], np.ndarray], faction: str
) -> np.ndarray:
    """Stack one faction's replicate-mean trajectories, ordered by replicate."""
    rows = [values for (rep, f), values in sorted(means.items()) if f == faction]
    if not rows:
        raise ValueError(f"no replicate means for faction {faction!r}")
    return np.stack(rows)


def bootstrap_band(
    replicate_trajectories: np.ndarray,
    window_ends: np.ndarray,
    faction: str,
    rng: np.random.Generator,
    resamples: int = 10_000,
    confidence: float = 0.95,
) -> TrajectoryBand:
    """Percentile bootstrap band over replicate-level mean trajectories.

    Replicates are resampled with replacement, averaged, and the per-window
    (1 +- confidence) / 2 percentiles of the resampled means become the
    band. The center line is the plain mean of the observed trajectories.
    """
    trajectories = np.atleast_2d(np.asarray(replicate_trajectories, dtype=float))
    n_reps = trajectories.shape[0]
    if n_reps < 2:
        raise DegenerateSampleError("bootstrap needs at least 2 replicate trajectories")
    if resamples < 1000:
        raise ValueError(f"resamples must be >= 1000, got {resamples}")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    idx = rng.integers(0, n_reps, size=(resamples, n_reps))
    resampled_means = trajectories[idx].mean(axis=1)
    alpha = (1.0 - confidence) / 2.0
    ci_low = np.quantile(resampled_means, alpha, axis=0)
    ci_high = np.quantile(resampled_means, 1.0 - alpha, axis=0)
    mean = trajectories.mean(axis=0)
    return TrajectoryBand(
        faction=faction,
        window_ends=np.asarray(window_ends),
        mean=mean,
        ci_low=np.minimum(ci_low, mean),
        ci_high=np.maximum(ci_high, mean),
        replicate_count=n_reps,
    )


def _check_sample(values: np.ndarray) -> tuple[float, float, int]:
    n = values.size
    if n < 2:
        raise DegenerateSampleError(f"need at least 2 observations, got {n}")
    mean = float(values.mean())
    sd = float(values.std(ddof=1))
    if sd == 0.0:
        raise DegenerateSampleError("sample variance is zero; statistic undefined")
    return mean, sd, n


def one_sample_t(deltas: np.ndarray) -> tuple[float, float]:
    """Two-sided one-sample t-test of the mean against zero.

    Returns (t, p) with t = mean / (sd / sqrt(n)) using the unbiased
    sample standard deviation and n - 1 degrees of freedom.
    """
    values = np.asarray(deltas, dtype=float)
    mean, sd, n = _check_sample(values)
    t = mean / (sd / math.sqrt(n))
    p = 2.0 * sps.t.sf(abs(t), df=n - 1)
    return t, float(p)


def cohens_d(deltas: np.ndarray) -> float:
    """Standardized effect size: sample mean over unbiased sample SD."""
    values = np.asarray(deltas, dtype=float)
    mean, sd, _ = _check_sample(values)
    return mean / sd


def stars_for_p(p: float, max_stars: int = MAX_STARS) -> str:
    """Decade star notation: one star per decade below 1e-2.

    '*' means p < 1e-2, '**' means p < 1e-3 and so on; empty when
    p >= 1e-2. A p of exactly zero (floating-point underflow) caps at
    ``max_stars``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p-value must lie in [0, 1], got {p}")
    if p == 0.0:
        return "*" * max_stars
    count = 0
    while count < max_stars and p < 10.0 ** (-(count + 2)):
        count += 1
    return "*" * count


def run_deltas(records: list[InterventionRecord]) -> np.ndarray:
    """Per-run effect values: replicate means of the focal-node deltas.

    With one focal node per replicate this is just the record deltas; with
    several, each run contributes the average over its focal nodes, so the
    test operates on independent simulation runs either way.
    """
    by_replicate: dict[int, list[float]] = {}
    for record in records:
        by_replicate.setdefault(record.replicate, []).append(record.delta)
    return np.array([float(np.mean(v)) for _, v in sorted(by_replicate.items())])


def summarize_effect(
    records: list[InterventionRecord], confidence: float = 0.95
) -> EffectSummary:
    """Reduce one transition's intervention records to an effect summary.

    Deltas aggregate per independent run (replicate) first. The confidence
    interval is the Student-t interval on the per-run deltas (consistent
    with the reported t-test), not a bootstrap.
    """
    if len(records) < 2:
        raise DegenerateSampleError("need at least 2 intervention records")
    transitions = {r.transition for r in records}
    t_stars = {r.t_star for r in records}
    if len(transitions) > 1 or len(t_stars) > 1:
        raise ValueError("records mix transitions or intervention times; summarize one group")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    deltas = run_deltas(records)
    mean, sd, n = _check_sample(deltas)
    t_stat, p = one_sample_t(deltas)
    t_crit = sps.t.ppf(0.5 + confidence / 2.0, df=n - 1)
    return EffectSummary(
        transition=records[0].transition,
        t_star=records[0].t_star,
        n_runs=n,
        delta_mean=mean,
        ci_half_width=float(t_crit * sd / math.sqrt(n)),
        t_statistic=t_stat,
        p_value=p,
        cohens_d=mean / sd,
        stars=stars_for_p(p),
    )
