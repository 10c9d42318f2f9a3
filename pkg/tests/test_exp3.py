import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exp3ixrl.exp3 import (
    LOG_RENORM,
    Exp3IxParams,
    Exp3Params,
    LearnerState,
    constant,
    default_eta,
    default_gamma_ix,
    default_gamma_mix,
    exp3_distribution,
    exp3_update,
    exp3ix_distribution,
    exp3ix_update,
)


def test_exp3_distribution_examples():
    assert exp3_distribution(LearnerState.uniform(4), Exp3Params(gamma_mix=constant(0.2))) == pytest.approx([0.25] * 4)
    s = LearnerState.from_weights([3, 1])
    assert exp3_distribution(s, Exp3Params(gamma_mix=constant(0.0))) == pytest.approx([0.75, 0.25], abs=1e-12)
    assert exp3_distribution(s, Exp3Params(gamma_mix=constant(0.2))) == pytest.approx([0.7, 0.3], abs=1e-12)


def test_exp3_distribution_floor():
    s = LearnerState.from_weights([1e-30, 1.0, 5.0])
    p = exp3_distribution(s, Exp3Params(gamma_mix=constant(0.3)))
    assert min(p) >= 0.1 - 1e-12 and sum(p) == pytest.approx(1.0, abs=1e-12)


def test_exp3ix_distribution_examples():
    assert exp3ix_distribution(LearnerState.uniform(10)) == pytest.approx([0.1] * 10)
    e = math.e
    assert exp3ix_distribution(LearnerState.from_weights([1, e])) == pytest.approx([1 / (1 + e), e / (1 + e)], abs=1e-12)
    assert exp3ix_distribution(LearnerState.from_weights([1, e])) == pytest.approx([0.2689, 0.7311], abs=1e-4)


@given(st.lists(st.floats(1e-6, 1e6), min_size=1, max_size=10), st.floats(1e-3, 1e3))
def test_distributions_scale_invariant(weights, c):
    a, b = LearnerState.from_weights(weights), LearnerState.from_weights([w * c for w in weights])
    assert exp3ix_distribution(a) == pytest.approx(exp3ix_distribution(b), abs=1e-12)
    assert exp3_distribution(a) == pytest.approx(exp3_distribution(b), abs=1e-12)
    assert np.argmax(a.weights) == np.argmax(b.weights)


def test_zero_loss_leaves_weights():
    s = LearnerState.from_weights([1.0, 2.0])
    exp3ix_update(s, None, 0, 0.0)
    exp3_update(s, None, 1, 0.0)
    assert s.weights == pytest.approx([1.0, 2.0], rel=1e-15)
    assert s.t == 2


def test_exp3ix_update_example():
    s = LearnerState.uniform(2)
    exp3ix_update(s, Exp3IxParams(eta=constant(0.5), gamma_ix=constant(0.1)), 0, 1.0)
    # Independent scalar recomputation.
    est = 1.0 / (0.5 + 0.1)
    w0 = math.exp(-0.5 * est)
    assert est == pytest.approx(1.6667, abs=1e-4)
    assert s.weights == pytest.approx([w0, 1.0], rel=1e-12)
    assert s.weights[0] == pytest.approx(0.43460, abs=1e-5)
    assert exp3ix_distribution(s) == pytest.approx([0.30294, 0.69706], abs=1e-5)


def test_exp3_update_example():
    s = LearnerState.uniform(2)
    exp3_update(s, Exp3Params(eta=constant(1.0), gamma_mix=constant(0.0)), 1, 0.5)
    assert s.weights == pytest.approx([1.0, math.exp(-1.0)], rel=1e-12)


@pytest.mark.parametrize("loss", [-0.1, 1.5, float("nan")])
def test_loss_outside_unit_interval_rejected(loss):
    with pytest.raises(ValueError):
        exp3ix_update(LearnerState.uniform(2), None, 0, loss)
    with pytest.raises(ValueError):
        exp3_update(LearnerState.uniform(2), None, 0, loss)


def test_schedules():
    assert default_eta(1, 10) == pytest.approx(math.sqrt(2 * math.log(10) / 10))
    assert default_gamma_ix(7, 10) == default_eta(7, 10) / 2
    assert default_gamma_mix(1, 10) == 0.5
    assert default_gamma_mix(10**6, 10) == pytest.approx(math.sqrt(10 * math.log(10) / 1e6))
    etas = [default_eta(t, 4) for t in range(1, 100)]
    assert all(a >= b > 0 for a, b in zip(etas, etas[1:]))
    assert default_eta(5, 1) > 0


def test_renormalization_keeps_weights_positive():
    s = LearnerState.uniform(3)
    p = Exp3IxParams(eta=constant(5.0), gamma_ix=constant(1e-3))
    for _ in range(5000):
        exp3ix_update(s, p, 0, 1.0)
        exp3ix_update(s, p, 1, 1.0)
        exp3ix_update(s, p, 2, 1.0)
        assert abs(max(s.log_weights)) <= LOG_RENORM
    assert all(w >= 0 for w in s.weights) and all(math.isfinite(v) for v in s.log_weights)


@settings(deadline=None, max_examples=50)
@given(st.integers(2, 10), st.floats(0.01, 1.0), st.floats(0.001, 0.5), st.integers(0, 2**32 - 1))
def test_ix_estimator_bias(k, eta, gamma, seed):
    # E[estimate_i] = loss_i * p_i / (p_i + gamma) over the arm draw, from the update rule.
    rng = np.random.default_rng(seed)
    w = rng.random(k) + 0.1
    p = w / w.sum()
    losses = rng.random(k)
    i = int(rng.integers(k))
    s = LearnerState.from_weights(w.tolist())
    before = s.log_weights[i]
    exp3ix_update(s, Exp3IxParams(constant(eta), constant(gamma)), i, float(losses[i]))
    est_when_played = (before - s.log_weights[i]) / eta
    assert est_when_played == pytest.approx(losses[i] / (p[i] + gamma), rel=1e-9, abs=1e-12)


def test_ix_estimator_bias_monte_carlo():
    # Drive the real update 10^6 times from the same starting weights.
    rng = np.random.default_rng(0)
    w = [0.05, 0.15, 0.3, 0.5]
    p = np.array(w)
    losses = [0.9, 0.2, 0.6, 0.4]
    gamma = 0.05
    params = Exp3IxParams(constant(1.0), constant(gamma))
    start = LearnerState.from_weights(w).log_weights
    n = 10**6
    est = np.zeros((n, 4))
    arms = rng.choice(4, size=n, p=p)
    s = LearnerState(list(start))
    for j, a in enumerate(arms):
        s.log_weights = list(start)
        exp3ix_update(s, params, int(a), losses[a])
        est[j, a] = start[a] - s.log_weights[a]
    for i in range(4):
        expected = losses[i] * p[i] / (p[i] + gamma)
        assert abs(est[:, i].mean() - expected) < 3 * est[:, i].std() / math.sqrt(n)


def test_replay_matches_bruteforce_oracle():
    from oracles import bruteforce_log_weights, random_history

    rng = np.random.default_rng(1)
    for _ in range(20):
        k, actions, losses = random_history(rng, t=200)
        s = LearnerState.uniform(k)
        for a, l in zip(actions, losses):
            exp3ix_update(s, None, a, l)
        got = np.array(s.log_weights) - max(s.log_weights)
        want = bruteforce_log_weights(k, actions, losses)
        assert np.max(np.abs(got - want)) <= 1e-9
