from saubandit.envs.bandits import (
    BernoulliBandit,
    UniformThresholdBandit,
    bernoulli_env,
    uniform_threshold_env,
)
from saubandit.envs.base import Environment, EnvironmentExhausted, step_regret
from saubandit.envs.datasets import (
    DATASETS,
    SCHEMAS,
    DatasetBandit,
    IngestionError,
    Schema,
    dataset_env,
    ingest_csv,
)
from saubandit.envs.linear import LinearBandit, LinearEnvSpec, linear_env

__all__ = [
    "BernoulliBandit",
    "DATASETS",
    "DatasetBandit",
    "Environment",
    "EnvironmentExhausted",
    "IngestionError",
    "LinearBandit",
    "LinearEnvSpec",
    "SCHEMAS",
    "Schema",
    "UniformThresholdBandit",
    "bernoulli_env",
    "dataset_env",
    "ingest_csv",
    "linear_env",
    "step_regret",
    "uniform_threshold_env",
]
