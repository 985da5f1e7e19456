"""Scenario construction: behavior-parameter sampling and initial networks.

Three experimental families are supported: pure networks where every node
shares one dominant disposition, 50-50 dual-faction networks, and mixed
networks with uniformly sampled parameters. Initial topology is a complete
directed graph (no self-loops) with uniform weights and opinions; the
ranges are spec fields so alternative initializations stay reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import A_COL, C_COL, H_COL, BehaviorParams, NetworkState

__all__ = [
    "FACTIONS",
    "UNCLASSIFIED",
    "PURE_KINDS",
    "ScenarioSpec",
    "faction_code",
    "sample_params",
    "sample_faction_normal",
    "build_network",
]

HOMOPHILIC = "homophilic"
NEOPHILIC = "neophilic"
CONFORMIC = "conformic"
UNCLASSIFIED = "unclassified"

FACTIONS = (HOMOPHILIC, NEOPHILIC, CONFORMIC)
FACTION_COLS = {HOMOPHILIC: H_COL, NEOPHILIC: A_COL, CONFORMIC: C_COL}
# short display codes used in transition labels and CSV output
FACTION_CODES = {HOMOPHILIC: "H", NEOPHILIC: "A", CONFORMIC: "C"}
CODE_FACTIONS = {v: k for k, v in FACTION_CODES.items()}

PURE_KINDS = {
    "pure-homophilic": HOMOPHILIC,
    "pure-neophilic": NEOPHILIC,
    "pure-conformic": CONFORMIC,
}
SCENARIO_KINDS = tuple(PURE_KINDS) + ("dual", "mixed")


def faction_code(faction: str) -> str:
    return FACTION_CODES[faction]


@dataclass(frozen=True)
class ScenarioSpec:
    """Configuration of one experimental scenario.

    ``kind`` selects the family; ``factions`` names the two factions of a
    dual scenario and is ignored otherwise. Pure/dual nodes draw their
    dominant coefficient from N(dominant_mean, spread) and the other two
    from N(recessive_mean, spread), clamped at zero; mixed nodes draw all
    three from U(uniform_low, uniform_high).
    """

    kind: str
    n: int = 300
    replicate_count: int = 10
    factions: tuple[str, str] | None = None
    dominant_mean: float = 0.25
    recessive_mean: float = 0.05
    spread: float = 0.025
    uniform_low: float = 0.05
    uniform_high: float = 0.3
    opinion_low: float = -0.25
    opinion_high: float = 0.25
    weight_low: float = 0.0
    weight_high: float = 1.0
    shuffle_factions: bool = False

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}; expected one of {SCENARIO_KINDS}")
        if self.n <= 0:
            raise ValueError(f"n must be > 0, got {self.n}")
        if self.replicate_count <= 0:
            raise ValueError(f"replicate_count must be > 0, got {self.replicate_count}")
        if self.spread < 0:
            raise ValueError(f"spread must be >= 0, got {self.spread}")
        if self.uniform_low >= self.uniform_high:
            raise ValueError("uniform_low must be < uniform_high")
        if self.opinion_low >= self.opinion_high:
            raise ValueError("opinion_low must be < opinion_high")
        if self.weight_low >= self.weight_high or self.weight_low < 0:
            raise ValueError("weight bounds must satisfy 0 <= weight_low < weight_high")
        if self.kind == "dual":
            if self.factions is None or len(self.factions) != 2:
                raise ValueError("dual scenarios need exactly two factions")
            if any(f not in FACTIONS for f in self.factions):
                raise ValueError(f"dual factions must be drawn from {FACTIONS}")
            if self.factions[0] == self.factions[1]:
                raise ValueError("dual factions must differ")
        elif self.factions is not None:
            raise ValueError(f"factions only apply to dual scenarios, not {self.kind!r}")

    def with_replicates(self, replicate_count: int) -> "ScenarioSpec":
        return replace(self, replicate_count=replicate_count)


def sample_faction_normal(
    spec: ScenarioSpec, faction: str, rng: np.random.Generator
) -> BehaviorParams:
    """Normal-rule draw with one dominant coefficient, clamped at zero.

    The faction's own coefficient comes from N(dominant_mean, spread) and
    the other two from N(recessive_mean, spread). This is both the pure /
    dual construction rule and the intervention reassignment rule.
    """
    if faction not in FACTIONS:
        raise ValueError(f"faction must be one of {FACTIONS}, got {faction!r}")
    values = np.full(3, spec.recessive_mean)
    values[FACTION_COLS[faction]] = spec.dominant_mean
    if spec.spread > 0:
        values = values + rng.normal(0.0, spec.spread, size=3)
    values = np.maximum(values, 0.0)
    return BehaviorParams(h=values[H_COL], a=values[A_COL], c=values[C_COL])


def sample_params(spec: ScenarioSpec, node_faction: str, rng: np.random.Generator) -> BehaviorParams:
    """Draw one node's (h, a, c) for its faction under the scenario's rules.

    Negative normal draws are clamped to zero at sampling time, so emitted
    coefficients always satisfy the non-negativity invariant.
    """
    if spec.kind == "mixed":
        if node_faction != UNCLASSIFIED:
            raise ValueError("mixed scenarios sample identically for every node")
        h, a, c = rng.uniform(spec.uniform_low, spec.uniform_high, size=3)
        return BehaviorParams(h=h, a=a, c=c)
    return sample_faction_normal(spec, node_faction, rng)


def _faction_labels(spec: ScenarioSpec, rng: np.random.Generator) -> list[str]:
    if spec.kind in PURE_KINDS:
        return [PURE_KINDS[spec.kind]] * spec.n
    if spec.kind == "mixed":
        return [UNCLASSIFIED] * spec.n
    first, second = spec.factions
    labels = [first] * (spec.n // 2) + [second] * (spec.n - spec.n // 2)
    if spec.shuffle_factions:
        labels = list(np.array(labels)[rng.permutation(spec.n)])
    return labels


def build_network(
    spec: ScenarioSpec, rng: np.random.Generator
) -> tuple[NetworkState, list[str]]:
    """Construct an initial network and its per-node faction labels.

    Draw order is fixed (labels, per-node parameters, weights, opinions) so
    a given (spec, seed) pair always yields the same network. Mixed nodes
    are labeled unclassified here; dominance classification happens at the
    experiment layer where the threshold lives.
    """
    labels = _faction_labels(spec, rng)
    params = np.empty((spec.n, 3), dtype=float)
    for i, faction in enumerate(labels):
        params[i] = sample_params(spec, faction, rng).as_array()
    weights = rng.uniform(spec.weight_low, spec.weight_high, size=(spec.n, spec.n))
    np.fill_diagonal(weights, 0.0)
    opinions = rng.uniform(spec.opinion_low, spec.opinion_high, size=spec.n)
    state = NetworkState(opinions=opinions, weights=weights, params=params, step=0)
    return state, labels
