"""Seeded random streams, reward-to-loss normalization and shared record types."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, List, Sequence

import numpy as np

MASK64 = (1 << 64) - 1
PROB_TOL = 1e-9

# SplitMix64 constants (Steele, Lea & Flood 2014). Fixed: changing them changes every run.
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
# FNV-1a 64-bit, used to fold the stream label into an integer.
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def splitmix64(x: int) -> int:
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def fnv1a64(text: str) -> int:
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & MASK64
    return h


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    stream_label: str
    run_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed <= MASK64:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.run_index < 0:
            raise ValueError(f"run_index must be non-negative, got {self.run_index}")


def derive_seed(spec: SeedSpec) -> int:
    """Child seed for one (component, run) stream.

    seed = splitmix64(splitmix64(splitmix64(master) ^ fnv1a64(label)) ^ run_index)

    Every stage is a bijection on 64-bit words, so for a fixed master seed two
    streams with the same run index and different labels (or the same label and
    different run indices) can never collide.
    """
    h = splitmix64(spec.master_seed)
    h = splitmix64(h ^ fnv1a64(spec.stream_label))
    return splitmix64(h ^ (spec.run_index & MASK64))


def make_rng(spec: SeedSpec) -> np.random.Generator:
    """PCG64 generator seeded from ``derive_seed``; bit-stable across platforms."""
    return np.random.Generator(np.random.PCG64(derive_seed(spec)))


def check_probability_vector(probs: Sequence[float]) -> None:
    if len(probs) == 0:
        raise ValueError("probability vector is empty")
    total = 0.0
    for p in probs:
        if not p >= 0.0 or math.isinf(p):
            raise ValueError(f"probability vector has invalid entry {p!r}")
        total += p
    if abs(total - 1.0) > PROB_TOL:
        raise ValueError(f"probability vector sums to {total!r}, not 1")


def _draw_index(probs: Sequence[float], u: float) -> int:
    # Inverse-CDF lookup; zero-probability entries are never returned.
    acc = 0.0
    last = 0
    for i, p in enumerate(probs):
        if p > 0.0:
            acc += p
            last = i
            if u < acc:
                return i
    return last


def sample_categorical(probs: Sequence[float], rng: np.random.Generator) -> int:
    """Draw an index from ``probs`` using exactly one uniform from ``rng``."""
    check_probability_vector(probs)
    return _draw_index(probs, rng.random())


@dataclass(frozen=True)
class RewardBounds:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise ValueError(f"invalid reward bounds [{self.lo}, {self.hi}]")


def reward_to_loss(r: float, bounds: RewardBounds) -> float:
    """Map a reward onto a loss in [0, 1]; rewards outside the bounds are clipped."""
    lo, hi = bounds.lo, bounds.hi
    clipped = lo if r < lo else hi if r > hi else r
    return (hi - clipped) / (hi - lo)


@dataclass(frozen=True)
class StepRecord:
    obs: Hashable
    action: int
    reward: float
    next_obs: Hashable
    terminal: bool


Trajectory = List[StepRecord]


def argmax(values: Sequence[float]) -> int:
    """Index of the largest value; ties go to the lowest index."""
    best = 0
    best_v = values[0]
    for i in range(1, len(values)):
        if values[i] > best_v:
            best = i
            best_v = values[i]
    return best
