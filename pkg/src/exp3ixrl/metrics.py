"""Regret ledgers, the brute-force CCE gap oracle, and run aggregation."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import _draw_index
from .exp3 import Exp3IxParams, LearnerState, exp3ix_distribution, exp3ix_update

MAX_PROFILES = 10**6


@dataclass
class RegretLedger:
    """Per-step chosen arm, its loss, and the loss every arm would have incurred."""

    actions: List[int] = field(default_factory=list)
    chosen_losses: List[float] = field(default_factory=list)
    loss_vectors: List[Sequence[float]] = field(default_factory=list)

    def record(self, action: int, loss_vector: Sequence[float]) -> None:
        self.actions.append(action)
        self.chosen_losses.append(loss_vector[action])
        self.loss_vectors.append(loss_vector)

    def __len__(self) -> int:
        return len(self.actions)


def regret(ledger: RegretLedger, horizon: Optional[int] = None) -> float:
    """Realized loss minus the loss of the best fixed arm in hindsight, over the first ``horizon`` steps."""
    T = len(ledger) if horizon is None else horizon
    if T < 1 or T > len(ledger):
        raise ValueError(f"horizon {T} outside 1..{len(ledger)}")
    vectors = np.asarray(ledger.loss_vectors[:T], dtype=float)
    return float(math.fsum(ledger.chosen_losses[:T]) - vectors.sum(axis=0).min())


def pseudo_regret(ledger: RegretLedger, true_mean_losses: Sequence[float]) -> float:
    if true_mean_losses is None:
        raise ValueError("pseudo-regret needs the true mean loss of every arm")
    means = list(true_mean_losses)
    return math.fsum(means[a] for a in ledger.actions) - len(ledger) * min(means)


@dataclass
class NormalFormGame:
    """``costs[i]`` is player i's cost array, indexed by the joint action profile."""

    action_counts: Tuple[int, ...]
    costs: List[np.ndarray]

    def __post_init__(self):
        self.action_counts = tuple(int(a) for a in self.action_counts)
        self.costs = [np.asarray(c, dtype=float).reshape(self.action_counts) for c in self.costs]
        if len(self.costs) != len(self.action_counts):
            raise ValueError("need one cost array per player")

    @property
    def players(self) -> int:
        return len(self.action_counts)

    @classmethod
    def from_dict(cls, data: dict) -> "NormalFormGame":
        n = int(data["players"])
        counts = tuple(data["action_counts"])
        size = math.prod(counts)
        if len(counts) != n or len(data["costs"]) != n:
            raise ValueError("players, action_counts and costs disagree")
        for i, flat in enumerate(data["costs"]):
            if len(flat) != size:
                raise ValueError(f"player {i} cost array has {len(flat)} entries, expected {size}")
        return cls(counts, [np.asarray(c, dtype=float) for c in data["costs"]])

    @classmethod
    def load(cls, path) -> "NormalFormGame":
        """Read a game file: ``{"players": N, "action_counts": [...], "costs": [[...], ...]}``
        with each cost array flattened in row-major profile order (last player fastest)."""
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {
            "players": self.players,
            "action_counts": list(self.action_counts),
            "costs": [c.ravel().tolist() for c in self.costs],
        }


def matching_pennies() -> NormalFormGame:
    match = np.array([[1.0, 0.0], [0.0, 1.0]])
    return NormalFormGame((2, 2), [1.0 - match, match])


def empirical_joint(action_counts: Sequence[int], profiles: Sequence[Sequence[int]]) -> np.ndarray:
    """Normalized visit counts of the joint action profiles that were played."""
    joint = np.zeros(tuple(action_counts))
    for prof in profiles:
        joint[tuple(prof)] += 1.0
    total = joint.sum()
    if total == 0:
        raise ValueError("no profiles")
    return joint / total


def cce_gap(game: NormalFormGame, joint) -> float:
    """Largest gain any player gets from a fixed unilateral deviation, by enumeration.

    ``joint`` is an array of probabilities over the joint profile space. The
    joint is an epsilon-CCE iff the result is at most epsilon.
    """
    sigma = np.asarray(joint, dtype=float)
    if sigma.shape != game.action_counts:
        raise ValueError(f"joint has shape {sigma.shape}, game has {game.action_counts}")
    if sigma.size > MAX_PROFILES:
        raise ValueError("game too large for enumeration")
    if sigma.min() < 0 or abs(sigma.sum() - 1.0) > 1e-9:
        raise ValueError("joint is not a probability distribution")
    gap = -math.inf
    for i in range(game.players):
        cost = game.costs[i]
        followed = 0.0
        for prof in itertools.product(*map(range, game.action_counts)):
            followed += sigma[prof] * cost[prof]
        # Marginal over the other players' recommendations.
        others = sigma.sum(axis=i)
        for dev in range(game.action_counts[i]):
            deviated = 0.0
            for rest in itertools.product(*(range(n) for j, n in enumerate(game.action_counts) if j != i)):
                prof = rest[:i] + (dev,) + rest[i:]
                deviated += others[rest] * cost[prof]
            gap = max(gap, followed - deviated)
    return float(gap)


@dataclass(frozen=True)
class SummaryRow:
    env: str
    algo: str
    teacher: str
    mean: float
    std: float
    sample_std: float
    runs: int


def aggregate_runs(results: Sequence) -> SummaryRow:
    """Mean and population std of cumulative eval reward, summed in run-index order."""
    if not results:
        raise ValueError("no runs to aggregate")
    keys = {(r.env, r.algo, r.teacher) for r in results}
    if len(keys) > 1:
        raise ValueError(f"mixed cells in aggregation: {sorted(keys)}")
    rewards = [r.cum_reward for r in sorted(results, key=lambda r: r.run_index)]
    n = len(rewards)
    mean = math.fsum(rewards) / n
    ss = math.fsum((x - mean) ** 2 for x in rewards)
    env, algo, teacher = keys.pop()
    return SummaryRow(
        env=env,
        algo=algo,
        teacher=teacher,
        mean=mean,
        std=math.sqrt(ss / n),
        sample_std=math.sqrt(ss / (n - 1)) if n > 1 else 0.0,
        runs=n,
    )


def selfplay_joint(game: NormalFormGame, rounds: int, rngs: Sequence, params=None) -> np.ndarray:
    """Empirical joint of independent EXP3-IX learners, one per player, with costs as losses.

    Costs must lie in [0, 1]. ``rngs`` holds one random stream per player.
    """
    if len(rngs) != game.players:
        raise ValueError("need one random stream per player")
    params = params or Exp3IxParams()
    learners = [LearnerState.uniform(k) for k in game.action_counts]
    counts = np.zeros(game.action_counts)
    for _ in range(rounds):
        prof = tuple(_draw_index(exp3ix_distribution(L), rng.random()) for L, rng in zip(learners, rngs))
        counts[prof] += 1.0
        for i, L in enumerate(learners):
            exp3ix_update(L, params, prof[i], float(game.costs[i][prof]))
    return counts / rounds
