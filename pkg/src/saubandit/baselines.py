"""Comparison methods: Beta-Bernoulli TS, UCB1, epsilon-greedy, Bayesian
linear-regression TS (exact and diagonal-precision), and uniform play."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincinv

from saubandit.rng import RngStream
from saubandit.sau import UninitializedArmError


# -- Beta-Bernoulli Thompson sampling ---------------------------------------


@dataclass(frozen=True)
class BetaArm:
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("Beta parameters must be positive")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    @property
    def variance(self) -> float:
        total = self.alpha + self.beta
        return self.alpha * self.beta / (total * total * (total + 1.0))


def beta_ts_sample(arm: BetaArm, rng: RngStream) -> float:
    return rng.beta(arm.alpha, arm.beta)


def _check_binary(r) -> None:
    r = np.asarray(r)
    if not np.all((r == 0) | (r == 1)):
        raise ValueError("Beta-Bernoulli TS only accepts rewards in {0, 1}")


def beta_ts_update(arm: BetaArm, r: float) -> BetaArm:
    _check_binary(r)
    return BetaArm(arm.alpha + r, arm.beta + (1 - r))


def gamma_from_uniform(shape, u):
    """Unit-scale gamma draws by inverse transform of uniforms in [0, 1)."""
    return gammaincinv(shape, u)


def beta_from_uniforms(alpha, beta, u1, u2):
    """Beta draws as the ratio of two inverse-transform gamma draws."""
    x = gamma_from_uniform(alpha, u1)
    y = gamma_from_uniform(beta, u2)
    total = x + y
    with np.errstate(invalid="ignore"):
        return np.where(total > 0, x / np.where(total > 0, total, 1.0), 0.5)


# -- UCB1 -------------------------------------------------------------------


def ucb1_score(mu_hat, n_a, n):
    if np.any(np.asarray(n_a) < 1):
        raise UninitializedArmError("UCB1 needs n_a >= 1")
    return mu_hat + np.sqrt(2.0 * np.log(n) / n_a)


# -- epsilon-greedy ---------------------------------------------------------


@dataclass(frozen=True)
class EpsilonSchedule:
    """Linear decay from ``eps0`` to ``eps_min`` over ``decay_steps``, then flat."""

    eps0: float = 0.1
    eps_min: float = 0.01
    decay_steps: int = 1

    def __post_init__(self):
        if not 0 <= self.eps_min <= self.eps0 <= 1:
            raise ValueError("need 0 <= eps_min <= eps0 <= 1")
        if self.decay_steps < 1:
            raise ValueError("decay_steps must be >= 1")

    @classmethod
    def for_horizon(cls, horizon: int, eps0: float = 0.1, eps_min: float = 0.01, decay_frac: float = 0.2):
        return cls(eps0, eps_min, max(1, int(round(decay_frac * horizon))))

    def __call__(self, step: int) -> float:
        frac = min(max(step - 1, 0) / self.decay_steps, 1.0)
        return self.eps0 + (self.eps_min - self.eps0) * frac


def epsilon_greedy_act(values, eps: float, rng: RngStream) -> int:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("empty value set")
    if not 0 <= eps <= 1:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    if eps > 0 and rng.uniform() < eps:
        return rng.integer(values.size)
    return int(np.argmax(values))


def uniform_act(n_arms: int, rng: RngStream) -> int:
    if n_arms < 1:
        raise ValueError("need at least one arm")
    return rng.integer(n_arms)


# -- Bayesian linear regression (normal / inverse-gamma) ---------------------


@dataclass(frozen=True)
class BayesLinearArm:
    precision: np.ndarray  # lam I + sum x x^T
    moment: np.ndarray  # sum x r
    a: float  # inverse-gamma shape
    b: float  # inverse-gamma rate
    yty: float = 0.0
    n: int = 0
    a0: float = 6.0
    b0: float = 6.0

    @classmethod
    def prior(cls, p: int, lam: float = 0.25, a0: float = 6.0, b0: float = 6.0) -> "BayesLinearArm":
        if lam <= 0 or a0 <= 0 or b0 <= 0:
            raise ValueError("prior parameters must be positive")
        return cls(lam * np.eye(p), np.zeros(p), a0, b0, 0.0, 0, a0, b0)

    @property
    def mean(self) -> np.ndarray:
        return np.linalg.solve(self.precision, self.moment)


def noise_rate(b0, yty, mean, moment):
    """Posterior rate ``b0 + (y^T y - mu^T Lambda mu) / 2``; ``Lambda mu = moment``."""
    quad = np.sum(mean * moment, axis=-1)
    # the bracket is non-negative in exact arithmetic
    return b0 + 0.5 * np.maximum(yty - quad, 0.0)


def bayes_linear_update(arm: BayesLinearArm, x, r: float) -> BayesLinearArm:
    x = np.asarray(x, dtype=float)
    if x.shape != arm.moment.shape:
        raise ValueError(f"context has shape {x.shape}, posterior expects {arm.moment.shape}")
    precision = arm.precision + np.outer(x, x)
    moment = arm.moment + x * r
    yty = arm.yty + r * r
    n = arm.n + 1
    mean = np.linalg.solve(precision, moment)
    return dataclasses.replace(
        arm,
        precision=precision,
        moment=moment,
        yty=yty,
        n=n,
        a=arm.a0 + 0.5 * n,
        b=float(noise_rate(arm.b0, yty, mean, moment)),
    )


def _draw_noise_variance(arm: BayesLinearArm, rng: RngStream) -> float:
    # inverse-gamma(a, b) as b / Gamma(a, 1)
    return arm.b / rng.gamma(arm.a)


def bayes_linear_ts_sample(arm: BayesLinearArm, x, rng: RngStream) -> float:
    x = np.asarray(x, dtype=float)
    sigma2 = _draw_noise_variance(arm, rng)
    cov = np.linalg.inv(arm.precision)
    chol = np.linalg.cholesky(sigma2 * cov)
    z = np.array([rng.gaussian() for _ in range(len(x))])
    theta = arm.mean + chol @ z
    return float(x @ theta)


def precision_diag_ts_sample(arm: BayesLinearArm, x, rng: RngStream) -> float:
    x = np.asarray(x, dtype=float)
    diag = np.diag(arm.precision)
    if np.any(diag <= 0):
        raise np.linalg.LinAlgError("precision has a non-positive diagonal entry")
    sigma2 = _draw_noise_variance(arm, rng)
    z = np.array([rng.gaussian() for _ in range(len(x))])
    theta = arm.mean + np.sqrt(sigma2 / diag) * z
    return float(x @ theta)


def predictive_variance(arm: BayesLinearArm, x, diag: bool = False) -> float:
    """Variance of ``x^T theta`` given sigma^2 = 1 (exact or diagonal covariance)."""
    x = np.asarray(x, dtype=float)
    if diag:
        return float(np.sum(x * x / np.diag(arm.precision)))
    return float(x @ np.linalg.solve(arm.precision, x))


def inverse_gamma_mean(a: float, b: float) -> float:
    return b / (a - 1.0) if a > 1 else math.inf
