import json
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exp3ixrl.core import SeedSpec, make_rng
from exp3ixrl.metrics import (
    NormalFormGame,
    RegretLedger,
    aggregate_runs,
    cce_gap,
    empirical_joint,
    matching_pennies,
    pseudo_regret,
    regret,
    selfplay_joint,
)


def ledger_from(actions, vectors):
    led = RegretLedger()
    for a, v in zip(actions, vectors):
        led.record(a, v)
    return led


def test_regret_hand_example():
    led = ledger_from([0, 0, 0], [(1, 0), (0, 1), (1, 0)])
    assert led.chosen_losses == [1, 0, 1]
    assert regret(led) == 1.0


def test_regret_zero_for_hindsight_best():
    vectors = [(0.3, 0.1), (0.2, 0.4), (0.5, 0.2)]
    assert regret(ledger_from([1, 1, 1], vectors)) == pytest.approx(0.0, abs=1e-15)


def test_regret_prefix_horizon():
    led = ledger_from([0, 1, 0], [(1, 0), (0, 1), (1, 0)])
    assert regret(led, 1) == 1.0
    with pytest.raises(ValueError):
        regret(led, 4)


@given(st.lists(st.tuples(st.integers(0, 3), st.lists(st.floats(0, 1), min_size=4, max_size=4)), min_size=1, max_size=50))
def test_regret_matches_direct_sum(rows):
    vectors = [v for _, v in rows]
    led = ledger_from([a for a, _ in rows], vectors)
    direct = sum(v[a] for a, v in rows) - min(sum(v[i] for v in vectors) for i in range(4))
    assert regret(led) == pytest.approx(direct, abs=1e-9)
    # Playing the hindsight-best arm throughout gives zero.
    best = int(np.argmin(np.sum(vectors, axis=0)))
    assert regret(ledger_from([best] * len(rows), vectors)) == pytest.approx(0.0, abs=1e-9)


def test_pseudo_regret_examples():
    led = ledger_from([1, 1], [(0.1, 0.5), (0.1, 0.5)])
    assert pseudo_regret(led, [0.1, 0.5]) == pytest.approx(0.8)
    assert pseudo_regret(ledger_from([0, 0], [(0.1, 0.5)] * 2), [0.1, 0.5]) == 0.0
    # Deterministic losses: pseudo-regret equals regret.
    means = [0.9, 0.5, 0.1]
    actions = [0, 1, 2, 1, 0]
    led = ledger_from(actions, [means] * 5)
    assert pseudo_regret(led, means) == pytest.approx(regret(led))
    with pytest.raises(ValueError):
        pseudo_regret(led, None)


def test_cce_gap_matching_pennies():
    g = matching_pennies()
    point = np.zeros((2, 2))
    point[0, 0] = 1.0
    assert cce_gap(g, point) == 1.0
    assert cce_gap(g, np.full((2, 2), 0.25)) == 0.0


def test_cce_gap_single_action_game():
    g = NormalFormGame((1, 1, 1), [np.array([3.0]), np.array([1.0]), np.array([-2.0])])
    assert cce_gap(g, np.ones((1, 1, 1))) == 0.0


def test_cce_gap_dimension_mismatch():
    with pytest.raises(ValueError):
        cce_gap(matching_pennies(), np.full((2, 3), 1 / 6))
    with pytest.raises(ValueError):
        cce_gap(matching_pennies(), np.full((2, 2), 0.3))


def _cce_gap_reference(game, joint):
    # Vectorized restatement: E_sigma c_i minus min over deviations of E_sigma c_i(d, s_-i).
    best = -np.inf
    for i in range(game.players):
        cost = np.moveaxis(game.costs[i], i, 0)
        sig = np.moveaxis(joint, i, 0)
        followed = (cost * sig).sum()
        other = sig.sum(axis=0)
        for d in range(cost.shape[0]):
            best = max(best, followed - (cost[d] * other).sum())
    return best


@settings(deadline=None, max_examples=30)
@given(st.sampled_from([(2, 2), (2, 3), (3, 2), (2, 2, 2)]), st.integers(0, 2**32 - 1))
def test_cce_gap_matches_vectorized_reference(shape, seed):
    rng = np.random.default_rng(seed)
    game = NormalFormGame(shape, [rng.random(shape) for _ in shape])
    joint = rng.random(shape)
    joint /= joint.sum()
    assert cce_gap(game, joint) == pytest.approx(_cce_gap_reference(game, joint), abs=1e-12)


def _permuted(game, joint, perms):
    costs = [c for c in game.costs]
    for axis, perm in enumerate(perms):
        costs = [np.take(c, perm, axis=axis) for c in costs]
        joint = np.take(joint, perm, axis=axis)
    return NormalFormGame(game.action_counts, costs), joint


def test_cce_gap_permutation_invariance():
    rng = np.random.default_rng(0)
    for _ in range(100):
        shape = [(2, 2), (2, 3)][int(rng.integers(2))]
        game = NormalFormGame(shape, [rng.random(shape) for _ in shape])
        joint = rng.random(shape)
        joint /= joint.sum()
        perms = [rng.permutation(n) for n in shape]
        g2, j2 = _permuted(game, joint, perms)
        assert abs(cce_gap(game, joint) - cce_gap(g2, j2)) <= 1e-12


def test_product_of_uniform_nash_has_zero_gap():
    u = np.array([0.5, 0.5])
    assert cce_gap(matching_pennies(), np.outer(u, u)) == 0.0


def test_game_file_round_trip(tmp_path):
    g = NormalFormGame((2, 3), [np.arange(6.0), -np.arange(6.0)])
    path = tmp_path / "game.json"
    path.write_text(json.dumps(g.to_dict()))
    again = NormalFormGame.load(path)
    assert again.action_counts == (2, 3)
    # Row-major: last player's action varies fastest.
    assert again.costs[0][1, 0] == 3.0
    bad = g.to_dict()
    bad["costs"][1] = [0.0] * 5
    with pytest.raises(ValueError):
        NormalFormGame.from_dict(bad)


def test_empirical_joint():
    j = empirical_joint((2, 2), [(0, 0), (0, 1), (0, 1), (1, 1)])
    assert j.tolist() == [[0.25, 0.5], [0.0, 0.25]]


def test_selfplay_small_gap():
    g = matching_pennies()
    joint = selfplay_joint(g, 20_000, [make_rng(SeedSpec(1, "p0")), make_rng(SeedSpec(1, "p1"))])
    assert joint.sum() == pytest.approx(1.0)
    assert cce_gap(g, joint) < 0.05


def run(i, reward, env="e", algo="a", teacher="t"):
    return SimpleNamespace(env=env, algo=algo, teacher=teacher, run_index=i, cum_reward=reward)


def test_aggregate_examples():
    row = aggregate_runs([run(0, 27.0)])
    assert (row.mean, row.std, row.runs) == (27.0, 0.0, 1)
    row = aggregate_runs([run(1, 3.0), run(0, 1.0)])
    assert (row.mean, row.std) == (2.0, 1.0)
    assert row.sample_std == pytest.approx(2**0.5)
    row = aggregate_runs([run(i, 0.7) for i in range(100)])
    assert row.mean == pytest.approx(0.7, abs=1e-15) and row.std == pytest.approx(0.0, abs=1e-15)


def test_aggregate_order_independent():
    rng = np.random.default_rng(3)
    runs = [run(i, float(v)) for i, v in enumerate(rng.normal(size=50))]
    a = aggregate_runs(runs)
    b = aggregate_runs(list(reversed(runs)))
    assert a == b
    vals = [r.cum_reward for r in runs]
    assert a.mean == pytest.approx(np.mean(vals), abs=1e-9)
    assert a.std == pytest.approx(np.std(vals), abs=1e-9)


def test_aggregate_errors():
    with pytest.raises(ValueError):
        aggregate_runs([])
    with pytest.raises(ValueError):
        aggregate_runs([run(0, 1.0), run(1, 1.0, algo="b")])
