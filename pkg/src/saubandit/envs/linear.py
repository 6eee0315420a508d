"""Synthetic linear contextual bandits ``r = x^T theta_a + noise``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from saubandit.envs.base import Environment
from saubandit.rng import BatchRng

CONTEXT_DISTS = ("gaussian", "ar1", "t")
THETA_DISTS = ("uniform", "gaussian")
ERROR_CORRS = ("iid", "ar1")


@dataclass(frozen=True)
class LinearEnvSpec:
    n_arms: int = 5
    dim: int = 5
    noise_sd: float = 0.5
    context_dist: str = "gaussian"
    context_rho: float = 0.5
    t_df: int = 2
    t_cap: float = 5.0
    theta_dist: str = "uniform"
    error_corr: str = "iid"
    error_rho: float = 0.5

    def __post_init__(self):
        if self.n_arms < 1 or self.dim < 1:
            raise ValueError("arms and dim must be positive")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be non-negative")
        if self.context_dist not in CONTEXT_DISTS:
            raise ValueError(f"context_dist must be one of {CONTEXT_DISTS}")
        if self.theta_dist not in THETA_DISTS:
            raise ValueError(f"theta_dist must be one of {THETA_DISTS}")
        if self.error_corr not in ERROR_CORRS:
            raise ValueError(f"error_corr must be one of {ERROR_CORRS}")
        for rho in (self.context_rho, self.error_rho):
            if not -1 < rho < 1:
                raise ValueError("AR(1) correlation must lie in (-1, 1)")
        if self.t_df < 1 or self.t_cap <= 0:
            raise ValueError("t contexts need df >= 1 and cap > 0")


def draw_theta(spec: LinearEnvSpec, gen: np.random.Generator) -> np.ndarray:
    shape = (spec.n_arms, spec.dim)
    if spec.theta_dist == "uniform":
        theta = gen.uniform(-1.0, 1.0, shape)
    else:
        theta = gen.standard_normal(shape)
    return theta / np.linalg.norm(theta, axis=1, keepdims=True)


def ar1_transform(z: np.ndarray, rho: float) -> np.ndarray:
    """Map iid N(0,1) along the last axis to AR(1) with unit marginal variance."""
    x = np.empty_like(z)
    x[..., 0] = z[..., 0]
    scale = np.sqrt(1.0 - rho * rho)
    for j in range(1, z.shape[-1]):
        x[..., j] = rho * x[..., j - 1] + scale * z[..., j]
    return x


def t_from_normals(z: np.ndarray, df: int) -> np.ndarray:
    """Student-t from ``df + 1`` normals in the last axis: z0 / sqrt(chi2_df / df)."""
    chi2 = np.sum(z[..., 1:] ** 2, axis=-1)
    return z[..., 0] / np.sqrt(chi2 / df)


class LinearBandit(Environment):
    name = "linear"

    def __init__(self, spec: LinearEnvSpec, theta: np.ndarray | None = None):
        self.spec = spec
        self.n_arms = spec.n_arms
        self.dim = spec.dim
        self._fixed_theta = theta

    def reset(self, rng: BatchRng) -> None:
        super().reset(rng)
        spec = self.spec
        if self._fixed_theta is not None:
            self.theta = np.broadcast_to(self._fixed_theta, (self.n_trials, spec.n_arms, spec.dim)).copy()
        else:
            self.theta = np.stack([draw_theta(spec, g) for g in rng.generators("theta")])
        ctx_shape = (spec.dim, spec.t_df + 1) if spec.context_dist == "t" else (spec.dim,)
        self._ctx = rng.tape("context", "normal", ctx_shape)
        self._noise = rng.tape("noise", "normal", (spec.n_arms,))
        self._err = None

    def next_context(self) -> np.ndarray:
        spec = self.spec
        z = self._ctx.next()
        if spec.context_dist == "gaussian":
            return z
        if spec.context_dist == "ar1":
            return ar1_transform(z, spec.context_rho)
        return np.clip(t_from_normals(z, spec.t_df), -spec.t_cap, spec.t_cap)

    def mean_rewards(self, x):
        return np.einsum("tkp,tp->tk", self.theta, x)

    def _errors(self) -> np.ndarray:
        spec = self.spec
        z = self._noise.next() * spec.noise_sd
        if spec.error_corr == "iid" or self._err is None:
            self._err = z
        else:
            rho = spec.error_rho
            self._err = rho * self._err + np.sqrt(1.0 - rho * rho) * z
        return self._err

    def reward(self, x, arms):
        rows = np.arange(self.n_trials)
        mean = np.einsum("tp,tp->t", self.theta[rows, arms], x)
        return mean + self._errors()[rows, arms]


def linear_env(spec: LinearEnvSpec, theta: np.ndarray | None = None) -> LinearBandit:
    return LinearBandit(spec, theta)
