"""Coupled opinion/edge-weight dynamics on a directed weighted network.

State advances by synchronous forward Euler steps: opinions relax toward
each node's perceived social norm (weighted in-neighborhood average) under
per-step noise, while edge weights respond to similarity (homophily) and
deviation from the perceived norm (attention to novelty). Weights are
clamped at zero and the diagonal carries no self-influence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

__all__ = [
    "BehaviorParams",
    "ModelConstants",
    "NetworkState",
    "SimulationBlowupError",
    "perceived_norm",
    "behavior_fh",
    "behavior_fa",
    "euler_step",
    "run_simulation",
]

# params array column layout, shared across modules
H_COL, A_COL, C_COL = 0, 1, 2


class SimulationBlowupError(RuntimeError):
    """Raised when an Euler step produces a non-finite opinion or weight."""

    def __init__(self, step: int, what: str):
        self.step = step
        super().__init__(f"non-finite {what} at step {step}; integration blew up")


@dataclass(frozen=True)
class BehaviorParams:
    """Per-node behavior coefficients: homophily, attention to novelty, conformity."""

    h: float
    a: float
    c: float

    def __post_init__(self):
        for name in ("h", "a", "c"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"behavior coefficient {name} must be finite and >= 0, got {v}")

    def as_array(self) -> np.ndarray:
        return np.array([self.h, self.a, self.c], dtype=float)


@dataclass(frozen=True)
class ModelConstants:
    """Global dynamics constants shared by every node.

    theta_h / theta_a set the zero crossings of the edge-weight response
    functions, dt is the Euler step size and noise_sigma the standard
    deviation of the per-node per-step opinion noise (applied as
    dt * noise in the update).
    """

    theta_h: float = 0.3
    theta_a: float = 0.3
    dt: float = 0.1
    noise_sigma: float = 0.9

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.theta_h < 0 or self.theta_a < 0:
            raise ValueError("theta_h and theta_a must be >= 0")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


@dataclass
class NetworkState:
    """Opinions, directed edge weights and behavior parameters at one step.

    ``weights[i, j]`` is the weight of the edge carrying information from
    source node j to target node i. ``params`` has one row per node with
    columns (h, a, c). Instances are treated as immutable once emitted;
    ``euler_step`` returns a fresh state.
    """

    opinions: np.ndarray
    weights: np.ndarray
    params: np.ndarray
    step: int = 0

    def __post_init__(self):
        self.opinions = np.asarray(self.opinions, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        self.params = np.asarray(self.params, dtype=float)
        n = self.opinions.shape[0]
        if self.opinions.ndim != 1:
            raise ValueError("opinions must be a 1-d vector")
        if self.weights.shape != (n, n):
            raise ValueError(f"weights must be {n}x{n}, got {self.weights.shape}")
        if self.params.shape != (n, 3):
            raise ValueError(f"params must be {n}x3 (h, a, c), got {self.params.shape}")
        if not np.all(np.isfinite(self.opinions)):
            raise ValueError("opinions must be finite")
        if np.any(self.weights < 0):
            raise ValueError("edge weights must be non-negative")
        if np.any(np.diag(self.weights) != 0):
            raise ValueError("self-loop weights must be zero")

    @classmethod
    def _unchecked(cls, opinions, weights, params, step) -> "NetworkState":
        # fast path for euler_step, whose construction guarantees the
        # invariants; skips the O(n^2) validation in the hot loop
        state = cls.__new__(cls)
        state.opinions = opinions
        state.weights = weights
        state.params = params
        state.step = step
        return state

    @property
    def n(self) -> int:
        return self.opinions.shape[0]

    def node_params(self, i: int) -> BehaviorParams:
        h, a, c = self.params[i]
        return BehaviorParams(h=h, a=a, c=c)

    def copy(self) -> "NetworkState":
        return NetworkState(
            opinions=self.opinions.copy(),
            weights=self.weights.copy(),
            params=self.params.copy(),
            step=self.step,
        )


def perceived_norm(state: NetworkState, i: int) -> float:
    """Weighted average opinion of node i's in-neighborhood.

    Falls back to node i's own opinion when its weight row is all zero
    (an isolated node perceives no social signal beyond itself).
    """
    row = state.weights[i]
    total = row.sum()
    if total == 0.0:
        return float(state.opinions[i])
    return float(row @ state.opinions / total)


def _perceived_norms(opinions: np.ndarray, weights: np.ndarray) -> np.ndarray:
    totals = weights.sum(axis=1)
    flows = weights @ opinions
    pos = totals > 0.0
    out = opinions.copy()  # zero-weight rows keep their own opinion
    out[pos] = flows[pos] / totals[pos]
    return out


def behavior_fh(x_i: float, x_j: float, theta_h: float) -> float:
    """Edge-strengthening response to opinion similarity: theta_h - |x_i - x_j|."""
    return theta_h - abs(x_i - x_j)


def behavior_fa(norm_i: float, x_j: float, theta_a: float) -> float:
    """Edge-strengthening response to novelty: |norm_i - x_j| - theta_a."""
    return abs(norm_i - x_j) - theta_a


@njit(cache=True)
def _euler_kernel(x, w, h, a, c, theta_h, theta_a, dt, eps):  # pragma: no cover - jitted
    n = x.size
    new_x = np.empty(n)
    new_w = np.empty((n, n))
    for i in range(n):
        tot = 0.0
        acc = 0.0
        for j in range(n):
            tot += w[i, j]
            acc += w[i, j] * x[j]
        norm_i = x[i] if tot == 0.0 else acc / tot
        new_x[i] = x[i] + dt * c[i] * (norm_i - x[i]) + dt * eps[i]
        h_i = h[i]
        a_i = a[i]
        x_i = x[i]
        for j in range(n):
            fh = theta_h - abs(x_i - x[j])
            fa = abs(norm_i - x[j]) - theta_a
            updated = w[i, j] + dt * (h_i * fh + a_i * fa)
            new_w[i, j] = updated if updated > 0.0 else 0.0
        new_w[i, i] = w[i, i]
    return new_x, new_w


def euler_step(
    state: NetworkState, constants: ModelConstants, rng: np.random.Generator
) -> NetworkState:
    """Advance the network one synchronous Euler step.

    Opinions and weights for step t+1 are both computed from the state at
    step t. One noise value per node is drawn from ``rng`` every call (also
    when noise_sigma is 0, keeping stream positions aligned across
    configurations). Weights are clamped at zero; the diagonal is never
    updated.

    Raises
    ------
    SimulationBlowupError
        If any updated opinion or weight is non-finite.
    """
    eps = rng.normal(0.0, constants.noise_sigma, size=state.n)
    new_x, new_w = _euler_kernel(
        np.ascontiguousarray(state.opinions),
        np.ascontiguousarray(state.weights),
        np.ascontiguousarray(state.params[:, H_COL]),
        np.ascontiguousarray(state.params[:, A_COL]),
        np.ascontiguousarray(state.params[:, C_COL]),
        constants.theta_h,
        constants.theta_a,
        constants.dt,
        eps,
    )
    step = state.step + 1
    if not np.all(np.isfinite(new_x)):
        raise SimulationBlowupError(step, "opinion")
    if not np.all(np.isfinite(new_w)):
        raise SimulationBlowupError(step, "edge weight")

    return NetworkState._unchecked(new_x, new_w, state.params, step)


def run_simulation(
    initial: NetworkState,
    constants: ModelConstants,
    steps: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Apply ``euler_step`` repeatedly, recording every node's opinion.

    Returns an (n, steps + 1) array whose column t holds the opinions at
    discrete step t, inclusive of the initial state at t = 0.
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    trajectories = np.empty((initial.n, steps + 1), dtype=float)
    trajectories[:, 0] = initial.opinions
    state = initial
    for t in range(1, steps + 1):
        state = euler_step(state, constants, rng)
        trajectories[:, t] = state.opinions
    return trajectories
