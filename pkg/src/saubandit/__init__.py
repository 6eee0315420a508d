"""Sample Average Uncertainty (SAU) exploration for multi-armed and contextual bandits."""

from saubandit.config import ConfigError, RunConfig, load_config, parse_config
from saubandit.harness import RegretTrace, Summary, aggregate, run_policy, run_trial, simulate
from saubandit.policies import (
    BetaTsPolicy,
    EpsilonGreedyPolicy,
    LinearModel,
    LinearTsPolicy,
    MeanModel,
    NeuralModel,
    OraclePolicy,
    SauPolicy,
    Ucb1Policy,
    UniformPolicy,
)
from saubandit.rng import BatchRng, RngStream
from saubandit.sau import ArmState, SauTracker, sampling_score, sau_update, select_action, ucb_score

__version__ = "0.1.0"

__all__ = [
    "ArmState",
    "BatchRng",
    "BetaTsPolicy",
    "ConfigError",
    "EpsilonGreedyPolicy",
    "LinearModel",
    "LinearTsPolicy",
    "MeanModel",
    "NeuralModel",
    "OraclePolicy",
    "RegretTrace",
    "RngStream",
    "RunConfig",
    "SauPolicy",
    "SauTracker",
    "Summary",
    "Ucb1Policy",
    "UniformPolicy",
    "aggregate",
    "load_config",
    "parse_config",
    "run_policy",
    "run_trial",
    "sampling_score",
    "sau_update",
    "select_action",
    "simulate",
    "ucb_score",
]
