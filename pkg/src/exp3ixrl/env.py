"""Bandit environments and the ring-defense stochastic game.

Every environment consumes a fixed number of draws from its random stream per
step, independent of the chosen action, so the stream is identical for any
agent run against the same seed.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Hashable, List, Optional, Tuple

import numpy as np

from .core import RewardBounds

EVAL_STEPS = 30


class NoOracleError(RuntimeError):
    """Raised when an environment has no closed-form optimum or true means."""


class Env(ABC):
    name: str
    action_count: int
    horizon: Optional[int]
    bounds: RewardBounds
    multi_state = False

    @abstractmethod
    def reset(self, rng: np.random.Generator) -> Hashable:
        ...

    @abstractmethod
    def step(self, action: int, rng: np.random.Generator) -> Tuple[Hashable, float, bool]:
        ...

    def actions_at(self, obs: Hashable) -> int:
        return self.action_count

    def loss_vector(self) -> Optional[List[float]]:
        """Losses every arm would have incurred on the last step, if the env exposes them."""
        return None

    def _check_action(self, action: int) -> None:
        if not 0 <= action < self.action_count:
            raise ValueError(f"action {action} out of range for {self.action_count} actions")


class DeterministicMab(Env):
    """Ten arms; arm ``a`` pays ``a / 10`` with no noise."""

    name = "det_mab"
    horizon = None
    bounds = RewardBounds(0.0, 1.0)

    def __init__(self, action_count: int = 10):
        self.action_count = action_count
        self.means = [a / 10 for a in range(action_count)]
        self._losses = [(self.bounds.hi - m) / (self.bounds.hi - self.bounds.lo) for m in self.means]

    def reset(self, rng):
        return 0

    def step(self, action, rng):
        self._check_action(action)
        return 0, self.means[action], False

    def loss_vector(self):
        return self._losses

    def mean_losses(self) -> List[float]:
        return list(self._losses)


class StochasticMab(Env):
    """Ten arms with standard-normal means drawn at construction plus unit-normal noise per pull.

    A full noise vector is drawn every step so the reward every arm would have
    paid is known (for regret ledgers) and stream usage does not depend on the action.
    """

    name = "stoch_mab"
    horizon = None
    bounds = RewardBounds(-5.0, 5.0)

    def __init__(self, rng: np.random.Generator, action_count: int = 10, means=None):
        self.action_count = action_count
        if means is None:
            means = rng.standard_normal(action_count)
        self.means = [float(m) for m in means]
        if len(self.means) != action_count:
            raise ValueError("means length does not match action_count")
        self._last_rewards: Optional[List[float]] = None

    def reset(self, rng):
        return 0

    def step(self, action, rng):
        self._check_action(action)
        noise = rng.standard_normal(self.action_count)
        self._last_rewards = [m + float(z) for m, z in zip(self.means, noise)]
        return 0, self._last_rewards[action], False

    def loss_vector(self):
        if self._last_rewards is None:
            return None
        lo, hi = self.bounds.lo, self.bounds.hi
        return [(hi - min(max(r, lo), hi)) / (hi - lo) for r in self._last_rewards]

    def mean_losses(self) -> List[float]:
        # Ignores clipping at the bounds (probability < 1e-3 per pull).
        lo, hi = self.bounds.lo, self.bounds.hi
        return [(hi - m) / (hi - lo) for m in self.means]


class RingDefense(Env):
    """Hosts on a ring; an infection spreads along edges, the defender cleans one host per step.

    The observation is the infection bitmask. Each step the chosen host is
    cleaned, then every infected host infects each neighbour independently with
    probability ``p_spread``; the reward is minus the infected fraction.
    """

    name = "ring"
    multi_state = True
    bounds = RewardBounds(-1.0, 0.0)

    def __init__(self, hosts: int = 6, p_spread: float = 0.3, horizon: int = 30):
        if hosts < 3:
            raise ValueError("ring needs at least 3 hosts")
        self.hosts = hosts
        self.action_count = hosts
        self.p_spread = p_spread
        self.horizon = horizon
        self.state = 1
        self.t = 0

    def reset(self, rng):
        self.state = 1
        self.t = 0
        return self.state

    def step(self, action, rng):
        self._check_action(action)
        n = self.hosts
        # Two uniforms per host (clockwise, counter-clockwise edge), always drawn.
        u = rng.random(2 * n)
        state = self.state & ~(1 << action)
        new = state
        for i in range(n):
            if state >> i & 1:
                if u[2 * i] < self.p_spread:
                    new |= 1 << ((i + 1) % n)
                if u[2 * i + 1] < self.p_spread:
                    new |= 1 << ((i - 1) % n)
        self.state = new
        self.t += 1
        reward = -bin(new).count("1") / n
        return new, reward, self.t >= self.horizon


def optimal_eval_return(env: Env, eval_steps: int = EVAL_STEPS) -> float:
    """Expected return of always pulling the best arm for ``eval_steps`` pulls."""
    if isinstance(env, (DeterministicMab, StochasticMab)):
        return eval_steps * max(env.means)
    raise NoOracleError(f"no closed-form optimum for {type(env).__name__}")


ENVIRONMENTS = ("det_mab", "stoch_mab", "ring")


def make_env(name: str, rng: np.random.Generator, **params) -> Env:
    if name == "det_mab":
        return DeterministicMab(**params)
    if name == "stoch_mab":
        return StochasticMab(rng, **params)
    if name == "ring":
        return RingDefense(**params)
    raise ValueError(f"unknown environment {name!r}; choose from {ENVIRONMENTS}")
