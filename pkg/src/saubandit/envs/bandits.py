"""Context-free two-level bandits: arm 0 pays ``mu_best``, the rest ``mu_best - gap``."""

from __future__ import annotations

import numpy as np

from saubandit.envs.base import Environment
from saubandit.rng import BatchRng


def _two_level_means(n_arms: int, mu_best: float, eps_gap: float) -> np.ndarray:
    if n_arms < 1:
        raise ValueError("need at least one arm")
    low = mu_best - eps_gap
    if not (0.0 <= low <= 1.0 and 0.0 <= mu_best <= 1.0):
        raise ValueError(f"arm probabilities must lie in [0, 1], got {mu_best} and {low}")
    means = np.full(n_arms, low)
    means[0] = mu_best
    return means


class BernoulliBandit(Environment):
    name = "bernoulli"

    def __init__(self, n_arms: int, mu_best: float, eps_gap: float):
        self.n_arms = n_arms
        self.means = _two_level_means(n_arms, mu_best, eps_gap)

    def reset(self, rng: BatchRng) -> None:
        super().reset(rng)
        self._u = rng.tape("reward", "uniform")
        self._table = np.broadcast_to(self.means, (self.n_trials, self.n_arms))

    def mean_rewards(self, x):
        return self._table

    def reward(self, x, arms):
        return (self._u.next() < self.means[arms]).astype(float)


class UniformThresholdBandit(BernoulliBandit):
    """Reward ``1{u <= mu_a}`` for ``u`` uniform on (0, 1]."""

    name = "uniform-threshold"

    def reward(self, x, arms):
        u = 1.0 - self._u.next()
        return (u <= self.means[arms]).astype(float)


def bernoulli_env(n_arms: int, mu_best: float, eps_gap: float) -> BernoulliBandit:
    return BernoulliBandit(n_arms, mu_best, eps_gap)


def uniform_threshold_env(n_arms: int, mu_best: float, eps_gap: float) -> UniformThresholdBandit:
    return UniformThresholdBandit(n_arms, mu_best, eps_gap)
