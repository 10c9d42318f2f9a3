"""EXP3 and EXP3-IX learners with importance-weighted loss estimates.

Weights are stored as log-weights. Renormalization (dividing every weight by
the maximum once the maximum leaves [1e-100, 1e100]) is a shift of the log
weights, which keeps every weight strictly positive however far it decays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

from .core import argmax

Schedule = Callable[[int, int], float]  # (round t >= 1, number of arms K) -> value

LOG_RENORM = 100.0 * math.log(10.0)


def default_eta(t: int, k: int) -> float:
    """Anytime rate sqrt(2 ln K / (K t)); ln K is floored at ln 2 so K = 1 stays positive."""
    return math.sqrt(2.0 * math.log(max(k, 2)) / (k * t))


def default_gamma_ix(t: int, k: int) -> float:
    return default_eta(t, k) / 2.0


def default_gamma_mix(t: int, k: int) -> float:
    return min(0.5, math.sqrt(k * math.log(max(k, 2)) / t))


def constant(value: float) -> Schedule:
    return lambda t, k: value


@dataclass
class Exp3Params:
    eta: Schedule = default_eta
    gamma_mix: Schedule = default_gamma_mix


@dataclass
class Exp3IxParams:
    eta: Schedule = default_eta
    gamma_ix: Schedule = default_gamma_ix


@dataclass
class LearnerState:
    log_weights: List[float]
    t: int = 0

    @classmethod
    def uniform(cls, k: int) -> "LearnerState":
        if k < 1:
            raise ValueError("a learner needs at least one action")
        return cls([0.0] * k)

    @classmethod
    def from_weights(cls, weights: Sequence[float], t: int = 0) -> "LearnerState":
        if any(not (w > 0.0 and math.isfinite(w)) for w in weights):
            raise ValueError("weights must be positive and finite")
        return cls([math.log(w) for w in weights], t)

    @property
    def k(self) -> int:
        return len(self.log_weights)

    @property
    def weights(self) -> List[float]:
        return [math.exp(v) for v in self.log_weights]

    def best_action(self) -> int:
        return argmax(self.log_weights)

    def renormalize(self) -> None:
        m = max(self.log_weights)
        if m > LOG_RENORM or m < -LOG_RENORM:
            self.log_weights = [v - m for v in self.log_weights]


def _normalized(log_weights: Sequence[float]) -> List[float]:
    m = max(log_weights)
    e = [math.exp(v - m) for v in log_weights]
    s = sum(e)
    return [x / s for x in e]


def exp3ix_distribution(state: LearnerState, params: Optional[Exp3IxParams] = None) -> List[float]:
    """Weights normalized to the simplex; EXP3-IX adds no explicit exploration."""
    return _normalized(state.log_weights)


def exp3_distribution(state: LearnerState, params: Optional[Exp3Params] = None) -> List[float]:
    """Weights mixed with the uniform distribution at rate gamma_mix(t)."""
    params = params or Exp3Params()
    k = state.k
    g = params.gamma_mix(state.t + 1, k)
    return [(1.0 - g) * p + g / k for p in _normalized(state.log_weights)]


def _check(state: LearnerState, action: int, loss: float) -> None:
    if not 0.0 <= loss <= 1.0:
        raise ValueError(f"loss {loss!r} outside [0, 1]; normalize rewards with reward_to_loss")
    if not 0 <= action < state.k:
        raise ValueError(f"action {action} out of range for {state.k} arms")


def apply_estimate(state: LearnerState, eta: float, action: int, estimate: float) -> LearnerState:
    """Multiplicative-weights step for an estimate that is zero off the played arm."""
    if estimate != 0.0:
        state.log_weights[action] -= eta * estimate
    state.t += 1
    state.renormalize()
    return state


def exp3_update(state: LearnerState, params: Optional[Exp3Params], action: int, loss: float) -> LearnerState:
    params = params or Exp3Params()
    _check(state, action, loss)
    p = exp3_distribution(state, params)[action]
    eta = params.eta(state.t + 1, state.k)
    return apply_estimate(state, eta, action, loss / p)


def exp3ix_update(state: LearnerState, params: Optional[Exp3IxParams], action: int, loss: float) -> LearnerState:
    params = params or Exp3IxParams()
    _check(state, action, loss)
    t, k = state.t + 1, state.k
    p = exp3ix_distribution(state)[action]
    return apply_estimate(state, params.eta(t, k), action, loss / (p + params.gamma_ix(t, k)))
