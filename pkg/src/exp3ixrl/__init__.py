"""Exp3-IXrl: CCE approximation by observing a reinforcement-learning teacher."""

from .core import RewardBounds, SeedSpec, StepRecord, derive_seed, make_rng, reward_to_loss, sample_categorical
from .env import DeterministicMab, NoOracleError, RingDefense, StochasticMab, make_env, optimal_eval_return
from .exp3 import (
    Exp3IxParams,
    Exp3Params,
    LearnerState,
    exp3_distribution,
    exp3_update,
    exp3ix_distribution,
    exp3ix_update,
)
from .harness import ExperimentConfig, RunResult, run_matrix, run_single, sweep_certainty, table1_configs
from .ixrl import (
    IxrlParams,
    StateEntry,
    StateTable,
    certainty_reached,
    ixrl_ingest_offline,
    ixrl_observe,
    ixrl_select,
)
from .metrics import NormalFormGame, RegretLedger, aggregate_runs, cce_gap, pseudo_regret, regret
from .teachers import UCB1, EpsilonGreedy, GradientBandit, TabularQ, make_teacher

__version__ = "0.1.0"
