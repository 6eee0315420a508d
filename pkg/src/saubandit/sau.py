"""Sample Average Uncertainty (SAU) statistic and the two SAU exploration rules.

An arm's SAU statistic is ``tau2 = S2 / n`` where ``S2`` accumulates squared
prediction residuals ``e = r - mu_hat`` on top of a prior offset (1 by
default).  The rules turn a value prediction ``mu_hat`` into a score:

* UCB:       ``mu_hat + sqrt(tau2 * log(n) / n_a)``
* Sampling:  ``mu_hat + sqrt(tau2 / n_a) * z`` with ``z ~ N(0, 1)``

Arms are 0-based; global steps ``n`` are 1-based.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from saubandit.rng import RngStream

UCB_FORMS = ("tau2", "tau")


class UninitializedArmError(ValueError):
    """A score was requested for an arm that has never been pulled."""


@dataclass(frozen=True)
class ArmState:
    n: int = 0
    s2: float = 1.0

    @property
    def tau2(self) -> float:
        # NaN marks an arm with no residuals yet
        return self.s2 / self.n if self.n else math.nan


def residual(reward, prediction):
    return reward - prediction


def sau_update(state: ArmState, e: float) -> ArmState:
    return dataclasses.replace(state, n=state.n + 1, s2=state.s2 + e * e)


def _ucb_bonus(tau2, n_a, step, form: str):
    if form == "tau2":
        spread = tau2
    elif form == "tau":
        spread = np.sqrt(tau2)
    else:
        raise ValueError(f"unknown UCB form {form!r}; expected one of {UCB_FORMS}")
    return np.sqrt(spread * np.log(step) / n_a)


def ucb_score(mu_hat: float, state: ArmState, n: int, form: str = "tau2") -> float:
    """SAU-UCB score; ``form="tau"`` uses ``sqrt(tau * log n / n_a)`` instead."""
    if state.n < 1:
        raise UninitializedArmError("SAU-UCB needs n_a >= 1; play the arm during round-robin first")
    if n < 1:
        raise ValueError(f"global step must be >= 1, got {n}")
    return float(mu_hat + _ucb_bonus(state.tau2, state.n, n, form))


def sampling_score(mu_hat: float, state: ArmState, rng: RngStream) -> float:
    if state.n < 1:
        raise UninitializedArmError("SAU-Sampling needs n_a >= 1; play the arm during round-robin first")
    return rng.gaussian(mu_hat, state.tau2 / state.n)


def select_action(scores, step: int, n_arms: int | None = None) -> int:
    """Round-robin for the first K steps, then argmax with lowest-index ties."""
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise ValueError("empty score set")
    k = scores.shape[-1] if n_arms is None else n_arms
    if step <= k:
        return step - 1
    return int(np.argmax(scores))


def select_actions(scores: np.ndarray, step: int) -> np.ndarray:
    """Batched :func:`select_action` over a leading trial axis."""
    n_trials, n_arms = scores.shape
    if step <= n_arms:
        return np.full(n_trials, step - 1, dtype=np.intp)
    return np.argmax(scores, axis=1)


class SauTracker:
    """Per-(trial, arm) SAU accumulators for a batch of trials."""

    def __init__(self, n_trials: int, n_arms: int, prior_s2: float = 1.0):
        if prior_s2 < 0:
            raise ValueError("prior_s2 must be non-negative")
        self.counts = np.zeros((n_trials, n_arms))
        self.s2 = np.full((n_trials, n_arms), float(prior_s2))

    @property
    def tau2(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.counts > 0, self.s2 / np.maximum(self.counts, 1), np.nan)

    def record(self, arms: np.ndarray, residuals: np.ndarray) -> None:
        rows = np.arange(len(arms))
        self.counts[rows, arms] += 1
        self.s2[rows, arms] += residuals * residuals

    def ucb(self, mu_hat: np.ndarray, step: int, form: str = "tau2") -> np.ndarray:
        if step <= mu_hat.shape[1]:
            # round-robin phase; the scores are ignored by select_actions
            return mu_hat
        return mu_hat + _ucb_bonus(self.tau2, self.counts, step, form)

    def sample(self, mu_hat: np.ndarray, z: np.ndarray, step: int) -> np.ndarray:
        if step <= mu_hat.shape[1]:
            return mu_hat
        return mu_hat + np.sqrt(self.tau2 / self.counts) * z
