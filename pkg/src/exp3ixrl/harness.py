"""Shared-seed training/evaluation runs, the benchmark matrix and the certainty sweep."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .core import SeedSpec, _draw_index, derive_seed, make_rng, reward_to_loss
from .env import ENVIRONMENTS, make_env
from .exp3 import (
    Exp3IxParams,
    Exp3Params,
    LearnerState,
    exp3_distribution,
    exp3_update,
    exp3ix_distribution,
    exp3ix_update,
)
from .ixrl import CCE, TEACHER, IxrlParams, StateTable, ixrl_observe, ixrl_select
from .metrics import RegretLedger, SummaryRow, aggregate_runs, regret
from .teachers import TEACHERS, make_teacher

ALGORITHMS = ("exp3", "exp3ix", "teacher-only", "exp3ixrl")
CSV_HEADER = ["env", "algo", "teacher", "run", "seed", "cum_reward", "regret"]
NO_TEACHER = "none"
OUT_DIR_ENV = "EXP3IXRL_OUT_DIR"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    env: str = "det_mab"
    algo: str = "exp3ixrl"
    teacher: Optional[str] = "ucb"
    env_params: Dict = field(default_factory=dict)
    teacher_params: Dict = field(default_factory=dict)
    train_steps: int = 10000
    eval_steps: int = 30
    runs: int = 100
    certainty: int = 2000
    behavior_smoothing: float = 1.0
    learn_after_certainty: bool = True
    observer_estimator: str = "self_normalized"
    eval_policy_mode: str = "argmax"
    seed: int = 0
    out_dir: Optional[str] = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.env not in ENVIRONMENTS:
            raise ConfigError(f"unknown env {self.env!r}; choose from {ENVIRONMENTS}")
        if self.algo not in ALGORITHMS:
            raise ConfigError(f"unknown algo {self.algo!r}; choose from {ALGORITHMS}")
        if self.train_steps < 0 or self.eval_steps < 1 or self.runs < 1 or self.certainty < 1:
            raise ConfigError("train_steps must be >= 0; eval_steps, runs and certainty must be positive")
        if self.algo in ("exp3", "exp3ix"):
            if self.env == "ring":
                raise ConfigError(f"{self.algo} is a single-state learner; ring has many states")
            self.teacher = None
        else:
            if self.teacher is None:
                raise ConfigError(f"{self.algo} requires a teacher")
            if self.teacher not in TEACHERS:
                raise ConfigError(f"unknown teacher {self.teacher!r}; choose from {TEACHERS}")
            if self.env == "ring" and self.teacher != "qlearning":
                raise ConfigError(f"teacher {self.teacher!r} ignores observations; ring needs qlearning")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    @property
    def teacher_label(self) -> str:
        return self.teacher or NO_TEACHER

    def ixrl_params(self) -> IxrlParams:
        return IxrlParams(
            certainty=self.certainty,
            eval_policy_mode=self.eval_policy_mode,
            behavior_smoothing=self.behavior_smoothing,
            learn_after_certainty=self.learn_after_certainty,
            observer_estimator=self.observer_estimator,
        )


@dataclass
class RunResult:
    env: str
    algo: str
    teacher: str
    run_index: int
    seeds: Dict[str, int]
    cum_reward: float
    eval_log: List[tuple]  # (action, reward, source)
    regret: float  # training regret in loss units; nan when the env has no counterfactual losses
    train_time: float
    audit: Dict[str, int] = field(default_factory=dict)


class _TracingRng:
    """Generator proxy recording every value drawn; used to check the shared-seed guarantee."""

    def __init__(self, rng, trace: list):
        self._rng = rng
        self._trace = trace

    def __getattr__(self, name):
        fn = getattr(self._rng, name)

        def call(*args, **kwargs):
            out = fn(*args, **kwargs)
            self._trace.append((name, repr(out.tolist() if hasattr(out, "tolist") else out)))
            return out

        return call


def _streams(config: ExperimentConfig, run_index: int):
    labels = ("env", "teacher", "agent")
    seeds = {lab: derive_seed(SeedSpec(config.seed, lab, run_index)) for lab in labels}
    rngs = {lab: make_rng(SeedSpec(config.seed, lab, run_index)) for lab in labels}
    return seeds, rngs


def run_single(config: ExperimentConfig, run_index: int, env_trace: Optional[list] = None) -> RunResult:
    """Train for ``train_steps`` environment steps, then evaluate greedily for ``eval_steps``.

    The environment stream depends only on (seed, "env", run_index), so every
    algorithm faces the same environment randomness for a given run.
    """
    seeds, rngs = _streams(config, run_index)
    env_rng = rngs["env"] if env_trace is None else _TracingRng(rngs["env"], env_trace)
    env = make_env(config.env, env_rng, **config.env_params)
    bounds = env.bounds
    teacher_rng, agent_rng = rngs["teacher"], rngs["agent"]
    algo = config.algo
    ledger = RegretLedger()
    track_regret = not env.multi_state

    teacher = learner = table = None
    params = None
    if algo in ("teacher-only", "exp3ixrl"):
        teacher = make_teacher(config.teacher, env.action_count, **config.teacher_params)
    if algo == "exp3":
        learner, params = LearnerState.uniform(env.action_count), Exp3Params()
    elif algo == "exp3ix":
        learner, params = LearnerState.uniform(env.action_count), Exp3IxParams()
    elif algo == "exp3ixrl":
        params = config.ixrl_params()
        table = StateTable(env.actions_at)
    audit = {"pre_certainty_steps": 0, "passthrough_violations": 0, "max_switches": 0}
    last_source: Dict = {}
    switches: Dict = {}

    start = time.perf_counter()
    obs = env.reset(env_rng)
    for _ in range(config.train_steps):
        if algo == "exp3":
            action = _draw_index(exp3_distribution(learner, params), agent_rng.random())
        elif algo == "exp3ix":
            action = _draw_index(exp3ix_distribution(learner), agent_rng.random())
        else:
            proposed = teacher.select(obs, teacher_rng)
            if algo == "teacher-only":
                action = proposed
            else:
                before = table.visits(obs)
                action, source = ixrl_select(table, params, obs, proposed, agent_rng)
                if before < params.certainty:
                    audit["pre_certainty_steps"] += 1
                    if source != TEACHER or action != proposed:
                        audit["passthrough_violations"] += 1
                elif source != CCE:
                    audit["passthrough_violations"] += 1
                prev = last_source.get(obs)
                if prev is not None and prev != source:
                    switches[obs] = switches.get(obs, 0) + 1
                last_source[obs] = source

        next_obs, reward, terminal = env.step(action, env_rng)
        if track_regret:
            ledger.record(action, env.loss_vector())
        if algo == "exp3":
            exp3_update(learner, params, action, reward_to_loss(reward, bounds))
        elif algo == "exp3ix":
            exp3ix_update(learner, params, action, reward_to_loss(reward, bounds))
        else:
            teacher.update(obs, action, reward, next_obs, terminal)
            if algo == "exp3ixrl":
                ixrl_observe(table, params, obs, action, reward_to_loss(reward, bounds), source)
        obs = env.reset(env_rng) if terminal else next_obs
    train_time = time.perf_counter() - start
    audit["max_switches"] = max(switches.values(), default=0)

    if env.multi_state:
        obs = env.reset(env_rng)
    eval_log = []
    for _ in range(config.eval_steps):
        if algo in ("exp3", "exp3ix"):
            action, source = learner.best_action(), "learner"
        else:
            proposed = teacher.select(obs, teacher_rng, greedy=True)
            if algo == "teacher-only":
                action, source = proposed, TEACHER
            else:
                action, source = ixrl_select(table, params, obs, proposed, agent_rng, evaluate=True)
        obs, reward, terminal = env.step(action, env_rng)
        eval_log.append((action, reward, source))
        if terminal:
            obs = env.reset(env_rng)

    return RunResult(
        env=config.env,
        algo=algo,
        teacher=config.teacher_label,
        run_index=run_index,
        seeds=seeds,
        cum_reward=math.fsum(r for _, r, _ in eval_log),
        eval_log=eval_log,
        regret=regret(ledger) if len(ledger) else math.nan,
        train_time=train_time,
        audit=audit,
    )


def exp3ix_self_run(env_name: str, steps: int, seed: int, run_index: int) -> RegretLedger:
    """EXP3-IX acting on its own in a bandit; returns the full-information regret ledger."""
    seeds, rngs = _streams(ExperimentConfig(env=env_name, algo="exp3ix", seed=seed), run_index)
    env = make_env(env_name, rngs["env"])
    if env.multi_state:
        raise ConfigError("self-run needs a bandit environment")
    learner, params = LearnerState.uniform(env.action_count), Exp3IxParams()
    ledger = RegretLedger()
    for _ in range(steps):
        action = _draw_index(exp3ix_distribution(learner), rngs["agent"].random())
        _, reward, _ = env.step(action, rngs["env"])
        ledger.record(action, env.loss_vector())
        exp3ix_update(learner, params, action, reward_to_loss(reward, env.bounds))
    return ledger


def _run_cell(config: ExperimentConfig, workers: int = 1) -> List[RunResult]:
    indices = range(config.runs)
    if workers > 1 and config.runs > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_single, [config] * config.runs, indices))
    else:
        results = [run_single(config, i) for i in indices]
    return sorted(results, key=lambda r: r.run_index)


def fmt(x: float) -> str:
    return format(x, ".6g")


def _round6(x: float) -> float:
    return float(fmt(x))


def runs_csv(results: Sequence[RunResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        w.writerow([r.env, r.algo, r.teacher, r.run_index, r.seeds["env"], fmt(r.cum_reward), fmt(r.regret)])
    return buf.getvalue()


def summary_json(rows: Sequence[SummaryRow]) -> str:
    """Per-cell mean, population std ("std") and sample std ("sample_std")."""
    cells = [
        {
            "env": s.env,
            "algo": s.algo,
            "teacher": s.teacher,
            "mean": _round6(s.mean),
            "std": _round6(s.std),
            "sample_std": _round6(s.sample_std),
            "runs": s.runs,
        }
        for s in rows
    ]
    return json.dumps({"std_kind": "population", "cells": cells}, indent=2) + "\n"


def resolve_out_dir(out_dir: Optional[str]) -> Optional[Path]:
    chosen = out_dir or os.environ.get(OUT_DIR_ENV)
    return Path(chosen) if chosen else None


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


@dataclass
class MatrixResult:
    rows: List[SummaryRow]
    runs: List[RunResult]
    csv_text: str
    json_text: str
    cell_seconds: List[float] = field(default_factory=list)


def run_matrix(configs: Sequence[ExperimentConfig], out_dir=None, workers: int = 1, stem: str = "results") -> MatrixResult:
    """Run every config, aggregate per cell, and write ``<stem>_runs.csv`` and ``<stem>_summary.json``."""
    rows, all_runs, seconds = [], [], []
    for cfg in configs:
        start = time.perf_counter()
        results = _run_cell(cfg, workers)
        seconds.append(time.perf_counter() - start)
        all_runs.extend(results)
        rows.append(aggregate_runs(results))
    out = MatrixResult(rows, all_runs, runs_csv(all_runs), summary_json(rows), seconds)
    target = resolve_out_dir(out_dir)
    if target is not None:
        _write(target / f"{stem}_runs.csv", out.csv_text)
        _write(target / f"{stem}_summary.json", out.json_text)
    return out


def table1_configs(
    train_steps: int = 10000, eval_steps: int = 30, runs: int = 100, certainty: int = 2000, seed: int = 0
) -> List[ExperimentConfig]:
    """Eight cells per bandit: EXP3, EXP3-IX, three teachers alone, and Exp3-IXrl taught by each."""
    common = dict(train_steps=train_steps, eval_steps=eval_steps, runs=runs, certainty=certainty, seed=seed)
    configs = []
    for env in ("det_mab", "stoch_mab"):
        configs.append(ExperimentConfig(env=env, algo="exp3", teacher=None, **common))
        configs.append(ExperimentConfig(env=env, algo="exp3ix", teacher=None, **common))
        for algo in ("teacher-only", "exp3ixrl"):
            for teacher in ("gradient", "ucb", "eps_greedy"):
                configs.append(ExperimentConfig(env=env, algo=algo, teacher=teacher, **common))
    return configs


def sweep_certainty(config: ExperimentConfig, thresholds: Sequence[int], out_dir=None, workers: int = 1):
    """One summary per certainty threshold over the shared seed set; writes ``sweep.csv``."""
    if config.algo != "exp3ixrl":
        raise ConfigError("the certainty sweep needs algo exp3ixrl")
    rows = []
    all_runs = []
    for c in thresholds:
        cfg = replace(config, certainty=int(c))
        results = _run_cell(cfg, workers)
        all_runs.extend(results)
        rows.append((int(c), aggregate_runs(results)))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["threshold", "mean", "std"])
    for c, s in rows:
        w.writerow([c, fmt(s.mean), fmt(s.std)])
    target = resolve_out_dir(out_dir)
    if target is not None:
        _write(target / "sweep.csv", buf.getvalue())
    return rows, buf.getvalue()
