"""Simulation lab for behaviorally heterogeneous adaptive social networks.

Couples opinion dynamics with adaptive edge weights, scores per-node
opinion trajectories with normalized Lempel-Ziv complexity, and runs
replicate scenario studies, causal single-node interventions and
parameter sweeps with bootstrap and t-test reporting.
"""

from .complexity import (
    ComplexityProfile,
    SymbolSequence,
    complexity_profile,
    discretize,
    lz76,
    normalized_lz,
    permutation_entropy,
)
from .model import (
    BehaviorParams,
    ModelConstants,
    NetworkState,
    SimulationBlowupError,
    behavior_fa,
    behavior_fh,
    euler_step,
    perceived_norm,
    run_simulation,
)
from .scenarios import FACTIONS, ScenarioSpec, build_network, sample_params
from .experiments import (
    InterventionRecord,
    ProfileRecord,
    SnapshotArchive,
    run_intervention,
    run_intervention_batch,
    run_scenario_study,
    select_focal_nodes,
    sweep,
)
from .stats import (
    EffectSummary,
    TrajectoryBand,
    bootstrap_band,
    cohens_d,
    one_sample_t,
    replicate_means,
    summarize_effect,
)
from .config import RunConfig, load_config

__version__ = "0.1.0"
