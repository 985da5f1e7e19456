"""Deterministic random-stream derivation.

Every stochastic draw in the package comes from a generator derived as
``SeedSequence(master_seed, spawn_key=(replicate, purpose, *extra))``, so
any output is regenerable from the master seed alone and independent
streams never overlap. Purpose codes are stable package-wide constants.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "INIT",
    "NOISE",
    "FOCAL",
    "BOOTSTRAP",
    "derive_rng",
    "generator_state",
    "generator_from_state",
]

INIT = 0  # network construction: labels, parameters, weights, opinions
NOISE = 1  # per-step opinion noise during simulation
FOCAL = 2  # focal-node choice and intervention parameter redraws
BOOTSTRAP = 3  # resampling indices for confidence bands


def derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Generator for the stream identified by (master_seed, *key)."""
    if master_seed < 0:
        raise ValueError("master_seed must be non-negative")
    if any(k < 0 for k in key):
        raise ValueError("seed-derivation key entries must be non-negative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=key)))


def generator_state(rng: np.random.Generator) -> dict:
    """Position marker of a generator, suitable for snapshots."""
    return rng.bit_generator.state


def generator_from_state(state: dict) -> np.random.Generator:
    """Rebuild a generator positioned exactly at a stored marker."""
    bitgen = np.random.PCG64()
    bitgen.state = state
    return np.random.Generator(bitgen)
