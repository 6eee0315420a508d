from __future__ import annotations

import numpy as np

from saubandit.rng import BatchRng


class EnvironmentExhausted(RuntimeError):
    pass


class Environment:
    """Batched bandit environment: one independent instance per trial.

    ``reward``, ``mean_rewards`` and ``optimal_value`` refer to the context
    most recently returned by ``next_context``.
    """

    n_arms: int
    dim: int = 0
    max_steps: int | None = None
    name: str = "env"

    def reset(self, rng: BatchRng) -> None:
        self.n_trials = rng.size

    def next_context(self) -> np.ndarray:
        return np.zeros((self.n_trials, self.dim))

    def mean_rewards(self, x: np.ndarray) -> np.ndarray:
        """Expected reward of every arm, shape (T, K)."""
        raise NotImplementedError

    def reward(self, x: np.ndarray, arms: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def optimal_value(self, x: np.ndarray) -> np.ndarray:
        return self.mean_rewards(x).max(axis=1)


def step_regret(env: Environment, x: np.ndarray, arms) -> np.ndarray:
    """Expected (not realized) regret of the chosen arms at context ``x``."""
    means = env.mean_rewards(x)
    arms = np.asarray(arms)
    chosen = np.take_along_axis(means, arms.reshape(-1, 1), axis=1)[:, 0]
    return means.max(axis=1) - chosen
