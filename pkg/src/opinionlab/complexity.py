"""Symbolization and complexity measures for continuous opinion trajectories.

Continuous opinions are binned into integer symbols on a grid centered at
zero; symbol sequences are scored with the exhaustive left-to-right
Lempel-Ziv (1976) parsing, normalized by n / log(n) so values are
comparable across sequence lengths. Permutation entropy over ordinal
patterns is provided as a complementary measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

__all__ = [
    "SymbolSequence",
    "ComplexityProfile",
    "discretize",
    "lz76",
    "lz76_boundaries",
    "normalized_lz",
    "complexity_profile",
    "permutation_entropy",
]


@dataclass(frozen=True)
class SymbolSequence:
    """A discrete symbol sequence over a finite alphabet.

    ``alphabet_size`` defaults to the number of distinct symbols observed;
    a larger declared alphabet is allowed (symbols that could occur but do
    not). Parsing-based complexity depends only on the equality structure
    of ``symbols``.
    """

    symbols: np.ndarray
    alphabet_size: int = 0

    def __post_init__(self):
        symbols = np.asarray(self.symbols, dtype=np.int64)
        if symbols.ndim != 1 or symbols.size == 0:
            raise ValueError("symbols must be a non-empty 1-d sequence")
        object.__setattr__(self, "symbols", symbols)
        observed = len(np.unique(symbols))
        if self.alphabet_size == 0:
            object.__setattr__(self, "alphabet_size", observed)
        elif self.alphabet_size < observed:
            raise ValueError(
                f"declared alphabet_size {self.alphabet_size} smaller than "
                f"{observed} distinct observed symbols"
            )

    def __len__(self) -> int:
        return self.symbols.size


@dataclass(frozen=True)
class ComplexityProfile:
    """Normalized LZ values of one node over a family of growing windows."""

    node: int
    window_ends: np.ndarray
    nlz_values: np.ndarray

    def __post_init__(self):
        ends = np.asarray(self.window_ends, dtype=np.int64)
        vals = np.asarray(self.nlz_values, dtype=float)
        if ends.shape != vals.shape or ends.ndim != 1:
            raise ValueError("window_ends and nlz_values must be aligned 1-d arrays")
        if ends.size and np.any(np.diff(ends) <= 0):
            raise ValueError("window_ends must be strictly increasing")
        if np.any(~np.isfinite(vals)) or np.any(vals <= 0):
            raise ValueError("nlz values must be finite and > 0")
        object.__setattr__(self, "window_ends", ends)
        object.__setattr__(self, "nlz_values", vals)


def discretize(trajectory: np.ndarray, bin_width: float) -> SymbolSequence:
    """Bin continuous values onto a grid of width ``bin_width`` centered at zero.

    Value x maps to integer symbol k = round(x / bin_width) with ties
    rounded away from zero, so the bin midpoint k * bin_width is the
    closest grid point.
    """
    if bin_width <= 0:
        raise ValueError(f"bin_width must be > 0, got {bin_width}")
    x = np.asarray(trajectory, dtype=float)
    if x.size == 0:
        raise ValueError("trajectory must be non-empty")
    if not np.all(np.isfinite(x)):
        raise ValueError("trajectory values must be finite")
    scaled = x / bin_width
    # np.round ties to even; the binning convention is ties away from zero
    symbols = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
    return SymbolSequence(symbols=symbols.astype(np.int64))


@njit(cache=True)
def _lz76_boundaries(s: np.ndarray) -> np.ndarray:  # pragma: no cover - jitted
    """Exclusive end positions of the components of the LZ76 exhaustive parse."""
    n = s.size
    boundaries = np.empty(n, dtype=np.int64)
    count = 0
    pos = 0
    while pos < n:
        # longest prefix of s[pos:] reproducible from earlier text, where a
        # candidate copy starts before pos and may overlap the phrase itself
        k_max = 0
        for start in range(pos):
            k = 0
            while pos + k < n and s[start + k] == s[pos + k]:
                k += 1
            if k > k_max:
                k_max = k
                if pos + k_max >= n:
                    break  # match already runs to the end; no longer one exists
        end = pos + k_max + 1  # innovative symbol extends the copied run
        if end > n:
            end = n  # trailing component may be non-unique; still counts once
        boundaries[count] = end
        count += 1
        pos = end
    return boundaries[:count]


def lz76_boundaries(sequence: SymbolSequence) -> np.ndarray:
    """Component end positions (exclusive) of the exhaustive LZ76 parse.

    The parse is a single left-to-right pass, so prefixes share it: the
    component count of the length-m prefix is
    ``searchsorted(boundaries, m, side="left") + 1`` for 1 <= m <= len.
    """
    return _lz76_boundaries(sequence.symbols)


def lz76(sequence: SymbolSequence) -> int:
    """Number of components in the exhaustive LZ76 parsing of the sequence."""
    return int(lz76_boundaries(sequence).size)


def _log_base(value: float, base: float) -> float:
    return math.log(value) / math.log(base)


def normalized_lz(sequence: SymbolSequence, log_base: float = 2.0) -> float:
    """Length-normalized LZ76 complexity: LZ * log(n) / n.

    The divisor n / log(n) is the asymptotic component count of an i.i.d.
    uniform sequence, so values near 1 indicate maximal unpredictability.
    """
    n = len(sequence)
    if n < 2:
        raise ValueError("normalized LZ needs a sequence of length >= 2")
    if log_base < 2:
        raise ValueError(f"log_base must be >= 2, got {log_base}")
    return lz76(sequence) * _log_base(n, log_base) / n


def complexity_profile(
    trajectory: np.ndarray,
    bin_width: float,
    window_step: int,
    log_base: float = 2.0,
    node: int = 0,
) -> ComplexityProfile:
    """Normalized LZ of the prefix windows [0, k * window_step] of a trajectory.

    The window end t covers samples 0..t inclusive (t + 1 symbols). A
    single parse of the full symbol sequence supplies every prefix count;
    numerically identical to re-parsing each prefix separately.
    """
    x = np.asarray(trajectory, dtype=float)
    if window_step < 1:
        raise ValueError(f"window_step must be >= 1, got {window_step}")
    if x.size < window_step + 1:
        raise ValueError(
            f"trajectory has {x.size} samples, shorter than the first window "
            f"[0, {window_step}]"
        )
    if log_base < 2:
        raise ValueError(f"log_base must be >= 2, got {log_base}")
    seq = discretize(x, bin_width)
    boundaries = lz76_boundaries(seq)
    ends = np.arange(window_step, x.size, window_step, dtype=np.int64)
    lengths = ends + 1
    counts = np.searchsorted(boundaries, lengths, side="left") + 1
    nlz = counts * (np.log(lengths) / math.log(log_base)) / lengths
    return ComplexityProfile(node=node, window_ends=ends, nlz_values=nlz)


def permutation_entropy(trajectory: np.ndarray, order: int = 4, delay: int = 1) -> float:
    """Normalized Shannon entropy of ordinal patterns in a trajectory.

    Each window (x[t], x[t+delay], ..., x[t+(order-1)*delay]) contributes
    the permutation that sorts it (ties broken by position). The entropy
    of the empirical pattern distribution is divided by log(order!) so the
    result lies in [0, 1].
    """
    x = np.asarray(trajectory, dtype=float)
    if order < 2:
        raise ValueError(f"order must be >= 2, got {order}")
    if delay < 1:
        raise ValueError(f"delay must be >= 1, got {delay}")
    if x.size < order * delay:
        raise ValueError(
            f"trajectory of length {x.size} too short for order {order}, delay {delay}"
        )
    n_patterns = x.size - (order - 1) * delay
    idx = np.arange(n_patterns)[:, None] + delay * np.arange(order)[None, :]
    ranks = np.argsort(x[idx], axis=1, kind="stable")
    # encode each permutation as an integer in factorial-number style
    codes = np.zeros(n_patterns, dtype=np.int64)
    for col in range(order):
        codes = codes * order + ranks[:, col]
    _, counts = np.unique(codes, return_counts=True)
    p = counts / counts.sum()
    entropy = -np.sum(p * np.log(p))
    return float(entropy / math.log(math.factorial(order)))
