"""Exp3-IXrl: per-observation EXP3-IX learners that watch a teacher until certain.

Until an observation has been visited ``certainty`` times the teacher's action
is executed and the observation's learner is trained off-policy from it. The
observed losses are normalized by the teacher's smoothed empirical action
frequency rather than the learner's own sampling probability:

* ``"self_normalized"`` (default): importance weights 1/b are self-normalized,
  so each action is charged its running mean teacher-sourced loss on every
  observed step.
* ``"ix"``: the per-play IX estimate loss / (b + gamma_ix) on the played action.
  Unbiased only when the teacher's action frequencies are stationary; with
  teachers that front-load exploration (UCB, early epsilon-greedy) rarely
  played actions end up badly under-charged.

Once certain, the learner acts and keeps learning on-policy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, Iterable, List, Optional, Tuple, Union

import numpy as np

from .core import RewardBounds, StepRecord, _draw_index, argmax, reward_to_loss
from .exp3 import Exp3IxParams, LearnerState, apply_estimate, exp3ix_distribution, exp3ix_update

TEACHER = "teacher"
CCE = "cce"
SNAPSHOT_FORMAT = "exp3ixrl-table/1"
OBSERVER_ESTIMATORS = ("self_normalized", "ix")


@dataclass
class IxrlParams:
    certainty: int = 2000
    eval_policy_mode: str = "argmax"  # or "sample"
    ix: Exp3IxParams = field(default_factory=Exp3IxParams)
    behavior_smoothing: float = 1.0
    learn_after_certainty: bool = True
    observer_estimator: str = "self_normalized"  # or "ix"
    prior_loss: float = 0.5

    def __post_init__(self):
        if self.certainty < 1:
            raise ValueError("certainty must be at least 1")
        if self.eval_policy_mode not in ("argmax", "sample"):
            raise ValueError(f"unknown eval_policy_mode {self.eval_policy_mode!r}")
        if self.behavior_smoothing <= 0:
            raise ValueError("behavior_smoothing must be positive")
        if self.observer_estimator not in OBSERVER_ESTIMATORS:
            raise ValueError(f"unknown observer_estimator {self.observer_estimator!r}")


@dataclass
class StateEntry:
    learner: LearnerState
    visits: int = 0
    behavior_counts: List[int] = field(default_factory=list)
    # Teacher-sourced visits; equals visits until the handoff.
    behavior_total: int = 0
    # Sum of teacher-sourced losses per action.
    loss_sums: List[float] = field(default_factory=list)

    @classmethod
    def fresh(cls, k: int) -> "StateEntry":
        return cls(LearnerState.uniform(k), 0, [0] * k, 0, [0.0] * k)

    @property
    def k(self) -> int:
        return len(self.behavior_counts)

    def behavior_frequency(self, smoothing: float = 1.0) -> List[float]:
        denom = self.behavior_total + self.k * smoothing
        return [(c + smoothing) / denom for c in self.behavior_counts]

    def mean_losses(self, smoothing: float = 1.0, prior: float = 0.5) -> List[float]:
        """Per-action mean teacher-sourced loss, shrunk toward ``prior`` with weight ``smoothing``."""
        return [(s + smoothing * prior) / (c + smoothing) for s, c in zip(self.loss_sums, self.behavior_counts)]


class StateTable:
    """Lazily populated map from observation key to ``StateEntry``."""

    def __init__(self, action_count: Union[int, Callable[[Hashable], int]]):
        self._action_count = action_count
        self.entries: Dict[Hashable, StateEntry] = {}

    def actions_at(self, obs: Hashable) -> int:
        if callable(self._action_count):
            return self._action_count(obs)
        return self._action_count

    def entry(self, obs: Hashable) -> StateEntry:
        e = self.entries.get(obs)
        if e is None:
            e = self.entries[obs] = StateEntry.fresh(self.actions_at(obs))
        return e

    def __contains__(self, obs) -> bool:
        return obs in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def visits(self, obs: Hashable) -> int:
        e = self.entries.get(obs)
        return 0 if e is None else e.visits

    def to_json(self) -> str:
        return json.dumps(snapshot(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str, action_count=None) -> "StateTable":
        return load_snapshot(json.loads(text), action_count)


def certainty_reached(table: StateTable, params: IxrlParams, obs: Hashable) -> bool:
    return table.visits(obs) >= params.certainty


def ixrl_select(
    table: StateTable,
    params: IxrlParams,
    obs: Hashable,
    teacher_action: int,
    rng: Optional[np.random.Generator] = None,
    evaluate: bool = False,
) -> Tuple[int, str]:
    """Return ``(action, source)``: the teacher's proposal below certainty, else the learner's choice.

    Certainty is compared against the visit count before this step is observed.
    Training draws from the learner's distribution; evaluation uses
    ``params.eval_policy_mode``. Visit counts are not touched here.
    """
    e = table.entry(obs)
    if not 0 <= teacher_action < e.k:
        raise ValueError(f"teacher action {teacher_action} out of range for {e.k} actions")
    if e.visits < params.certainty:
        return teacher_action, TEACHER
    if evaluate and params.eval_policy_mode == "argmax":
        return e.learner.best_action(), CCE
    if rng is None:
        raise ValueError("sampling from the learner needs a random stream")
    return _draw_index(exp3ix_distribution(e.learner), rng.random()), CCE


def ixrl_observe(
    table: StateTable,
    params: IxrlParams,
    obs: Hashable,
    action: int,
    loss: float,
    source: str = TEACHER,
) -> StateTable:
    """Count the visit and update the observation's learner with the incurred loss."""
    if not 0.0 <= loss <= 1.0:
        raise ValueError(f"loss {loss!r} outside [0, 1]")
    e = table.entry(obs)
    if not 0 <= action < e.k:
        raise ValueError(f"action {action} out of range for {e.k} actions")
    e.visits += 1
    if source == TEACHER:
        e.behavior_counts[action] += 1
        e.behavior_total += 1
        e.loss_sums[action] += loss
        learner = e.learner
        t, k = learner.t + 1, learner.k
        eta = params.ix.eta(t, k)
        s = params.behavior_smoothing
        if params.observer_estimator == "ix":
            b = (e.behavior_counts[action] + s) / (e.behavior_total + e.k * s)
            apply_estimate(learner, eta, action, loss / (b + params.ix.gamma_ix(t, k)))
        else:
            # Self-normalized importance weighting: sum(loss / b) / sum(1 / b) over the
            # plays of an action is its mean loss, charged to every action each step.
            lw = learner.log_weights
            for i, m in enumerate(e.mean_losses(s, params.prior_loss)):
                lw[i] -= eta * m
            learner.t += 1
            learner.renormalize()
    elif source == CCE:
        if params.learn_after_certainty:
            exp3ix_update(e.learner, params.ix, action, loss)
    else:
        raise ValueError(f"unknown action source {source!r}")
    return table


def ixrl_ingest_offline(
    table: StateTable,
    params: IxrlParams,
    trajectory: Iterable[StepRecord],
    bounds: RewardBounds,
) -> StateTable:
    """Fold logged teacher play into the table, in order."""
    for i, rec in enumerate(trajectory):
        try:
            ixrl_observe(table, params, rec.obs, rec.action, reward_to_loss(rec.reward, bounds), TEACHER)
        except ValueError as exc:
            raise ValueError(f"record {i}: {exc}") from exc
    return table


def _encode_obs(obs):
    if isinstance(obs, tuple):
        return [_encode_obs(o) for o in obs]
    return obs


def _decode_obs(obs):
    if isinstance(obs, list):
        return tuple(_decode_obs(o) for o in obs)
    return obs


def snapshot(table: StateTable) -> dict:
    """Plain-data view of the table.

    ``{"format": "exp3ixrl-table/1", "entries": [{"obs", "visits",
    "behavior_counts", "behavior_total", "loss_sums", "t", "log_weights", "weights"}, ...]}``
    with entries sorted by ``repr(obs)``; tuple observations become JSON arrays.
    ``weights`` is informational; ``log_weights`` is authoritative on load.
    """
    rows = []
    for obs in sorted(table.entries, key=repr):
        e = table.entries[obs]
        rows.append(
            {
                "obs": _encode_obs(obs),
                "visits": e.visits,
                "behavior_counts": list(e.behavior_counts),
                "behavior_total": e.behavior_total,
                "loss_sums": list(e.loss_sums),
                "t": e.learner.t,
                "log_weights": list(e.learner.log_weights),
                "weights": e.learner.weights,
            }
        )
    return {"format": SNAPSHOT_FORMAT, "entries": rows}


def load_snapshot(data: dict, action_count=None) -> StateTable:
    if data.get("format") != SNAPSHOT_FORMAT:
        raise ValueError(f"unsupported snapshot format {data.get('format')!r}")
    sizes = {}
    entries = {}
    for row in data["entries"]:
        obs = _decode_obs(row["obs"])
        e = StateEntry(
            LearnerState([float(v) for v in row["log_weights"]], int(row["t"])),
            int(row["visits"]),
            [int(c) for c in row["behavior_counts"]],
            int(row.get("behavior_total", sum(row["behavior_counts"]))),
            [float(v) for v in row.get("loss_sums", [0.0] * len(row["behavior_counts"]))],
        )
        if e.k != e.learner.k:
            raise ValueError(f"entry {obs!r}: behavior_counts and weights differ in length")
        entries[obs] = e
        sizes[obs] = e.k
    if action_count is None:
        if len(set(sizes.values())) > 1:
            raise ValueError("entries have differing action counts; pass action_count")
        action_count = next(iter(sizes.values()), 1)
    table = StateTable(action_count)
    table.entries = entries
    return table
