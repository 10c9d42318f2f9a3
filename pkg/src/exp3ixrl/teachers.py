"""Classical RL teachers: epsilon-greedy, UCB1, gradient bandit and tabular Q-learning.

Teachers consume raw rewards. ``select(obs, rng, greedy=False)`` proposes an
action; ``greedy=True`` is the deterministic evaluation policy.
"""

from __future__ import annotations

import math
from collections import defaultdict
from typing import Hashable, List

import numpy as np

from .core import _draw_index, argmax


class EpsilonGreedy:
    def __init__(self, n_actions: int, epsilon: float = 0.1):
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        self.n_actions = n_actions
        self.epsilon = epsilon
        self.q: List[float] = [0.0] * n_actions
        self.counts: List[int] = [0] * n_actions

    def select(self, obs: Hashable, rng: np.random.Generator, greedy: bool = False) -> int:
        if not greedy and rng.random() < self.epsilon:
            return int(rng.integers(self.n_actions))
        return argmax(self.q)

    def update(self, obs, action: int, reward: float, next_obs=None, terminal: bool = False) -> None:
        self.counts[action] += 1
        self.q[action] += (reward - self.q[action]) / self.counts[action]


class UCB1:
    def __init__(self, n_actions: int, c: float = math.sqrt(2.0)):
        self.n_actions = n_actions
        self.c = c
        self.q: List[float] = [0.0] * n_actions
        self.counts: List[int] = [0] * n_actions
        self.t = 0

    def index(self) -> List[float]:
        log_t = math.log(self.t)
        return [q + self.c * math.sqrt(log_t / n) for q, n in zip(self.q, self.counts)]

    def select(self, obs, rng, greedy: bool = False) -> int:
        # UCB is deterministic; greedy and training selection coincide.
        for i, n in enumerate(self.counts):
            if n == 0:
                return i
        return argmax(self.index())

    def update(self, obs, action, reward, next_obs=None, terminal=False) -> None:
        self.t += 1
        self.counts[action] += 1
        self.q[action] += (reward - self.q[action]) / self.counts[action]


def softmax(h: List[float]) -> List[float]:
    m = max(h)
    e = [math.exp(x - m) for x in h]
    s = sum(e)
    return [x / s for x in e]


class GradientBandit:
    """Softmax preferences trained by stochastic gradient ascent against a running-mean baseline."""

    def __init__(self, n_actions: int, alpha: float = 0.1, use_baseline: bool = True):
        self.n_actions = n_actions
        self.alpha = alpha
        self.use_baseline = use_baseline
        self.h: List[float] = [0.0] * n_actions
        self.baseline = 0.0
        self.t = 0

    def policy(self) -> List[float]:
        return softmax(self.h)

    def select(self, obs, rng, greedy: bool = False) -> int:
        if greedy:
            return argmax(self.h)
        return _draw_index(self.policy(), rng.random())

    def update(self, obs, action, reward, next_obs=None, terminal=False) -> None:
        pi = self.policy()
        step = self.alpha * (reward - self.baseline)
        h = self.h
        for i in range(self.n_actions):
            if i == action:
                h[i] += step * (1.0 - pi[i])
            else:
                h[i] -= step * pi[i]
        self.t += 1
        if self.use_baseline:
            self.baseline += (reward - self.baseline) / self.t


class TabularQ:
    """Epsilon-greedy one-step Q-learning over hashable observations."""

    def __init__(self, n_actions: int, alpha: float = 0.1, gamma: float = 0.99, epsilon: float = 0.1):
        if not 0.0 <= gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        self.n_actions = n_actions
        self.alpha = alpha
        self.gamma = gamma
        self.epsilon = epsilon
        self.q = defaultdict(lambda: [0.0] * n_actions)

    def values(self, obs) -> List[float]:
        # Reading must not create entries.
        return self.q[obs] if obs in self.q else [0.0] * self.n_actions

    def select(self, obs, rng, greedy: bool = False) -> int:
        if not greedy and rng.random() < self.epsilon:
            return int(rng.integers(self.n_actions))
        return argmax(self.values(obs))

    def update(self, obs, action, reward, next_obs=None, terminal=False) -> None:
        future = 0.0 if terminal else max(self.values(next_obs))
        row = self.q[obs]
        row[action] += self.alpha * (reward + self.gamma * future - row[action])


TEACHERS = ("eps_greedy", "ucb", "gradient", "qlearning")


def make_teacher(name: str, n_actions: int, **params):
    if name == "eps_greedy":
        return EpsilonGreedy(n_actions, **params)
    if name == "ucb":
        return UCB1(n_actions, **params)
    if name == "gradient":
        return GradientBandit(n_actions, **params)
    if name == "qlearning":
        return TabularQ(n_actions, **params)
    raise ValueError(f"unknown teacher {name!r}; choose from {TEACHERS}")
