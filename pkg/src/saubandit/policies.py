"""Batched policies behind one predict / act / update interface.

A policy instance drives a batch of independent trials in lockstep; every
array carries a leading trial axis.  Value models (running means, ridge
regression, MLP) are separate from the exploration rule, so SAU and
epsilon-greedy can sit on top of any of them.
"""

from __future__ import annotations

import numpy as np

from saubandit import baselines
from saubandit.envs.base import Environment
from saubandit.linear import LinearArmModel, linear_update
from saubandit.neural import AdamState, Mlp, ReplayBuffer, forward, train_burst
from saubandit.rng import BatchRng
from saubandit.sau import SauTracker, select_actions

# -- value models --------------------------------------------------------------


class MeanModel:
    """Per-arm running mean of rewards; ignores context."""

    def reset(self, n_trials: int, n_arms: int, dim: int, horizon: int, rng: BatchRng) -> None:
        self.counts = np.zeros((n_trials, n_arms))
        self.means = np.zeros((n_trials, n_arms))

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.means.copy()

    def update(self, x, arms, rewards) -> None:
        rows = np.arange(len(arms))
        self.counts[rows, arms] += 1
        self.means[rows, arms] += (rewards - self.means[rows, arms]) / self.counts[rows, arms]


class LinearModel:
    """One ridge-regression model per (trial, arm)."""

    def __init__(self, lam: float = 1.0):
        self.lam = lam

    def reset(self, n_trials, n_arms, dim, horizon, rng) -> None:
        if dim < 1:
            raise ValueError("linear value model needs contexts")
        self.model = LinearArmModel.empty(dim, self.lam, batch=(n_trials, n_arms))

    def predict(self, x):
        return np.einsum("tkp,tp->tk", self.model.theta, x)

    def update(self, x, arms, rewards) -> None:
        idx = (np.arange(len(arms)), arms)
        self.model.put(idx, linear_update(self.model.take(idx), x, rewards))


class NeuralModel:
    """MLP with one output per arm, retrained in bursts from a replay buffer."""

    def __init__(
        self,
        hidden: tuple[int, ...] = (100, 100),
        lr: float = 0.003,
        train_every: int = 20,
        train_steps: int = 10,
        batch: int = 64,
    ):
        self.hidden = tuple(hidden)
        self.lr = lr
        self.train_every = train_every
        self.train_steps = train_steps
        self.batch = batch

    def reset(self, n_trials, n_arms, dim, horizon, rng) -> None:
        if dim < 1:
            raise ValueError("neural value model needs contexts")
        self.net = Mlp.init((dim, *self.hidden, n_arms), generators=rng.generators("init"))
        self.adam = AdamState.for_net(self.net, lr=self.lr)
        self.buffer = ReplayBuffer(n_trials, dim, horizon)
        self._batches = rng.tape("minibatch", "uniform", (self.batch,))

    def predict(self, x):
        return forward(self.net, x[:, None, :])[:, 0, :]

    def update(self, x, arms, rewards) -> None:
        self.buffer.add(x, arms, rewards)
        if self.buffer.size % self.train_every == 0:
            train_burst(self.net, self.adam, self.buffer, self.train_steps, self.batch, self._batches)


def make_model(kind: str, **params):
    if kind == "mean":
        return MeanModel()
    if kind == "linear":
        return LinearModel(**params)
    if kind == "neural":
        return NeuralModel(**params)
    raise ValueError(f"unknown value model {kind!r}")


# -- policies ------------------------------------------------------------------


class Policy:
    name = "policy"

    def reset(self, env: Environment, horizon: int, rng: BatchRng) -> None:
        self.n_trials = rng.size
        self.n_arms = env.n_arms

    def predict(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def act(self, values: np.ndarray, step: int) -> np.ndarray:
        raise NotImplementedError

    def update(self, x: np.ndarray, arms: np.ndarray, rewards: np.ndarray) -> None:
        pass


class SauPolicy(Policy):
    """SAU-UCB or SAU-Sampling on top of a value model."""

    def __init__(self, model, rule: str = "sampling", prior_s2: float = 1.0, ucb_form: str = "tau2", name=None):
        if rule not in ("ucb", "sampling"):
            raise ValueError(f"unknown SAU rule {rule!r}")
        self.model = model
        self.rule = rule
        self.prior_s2 = prior_s2
        self.ucb_form = ucb_form
        self.name = name or f"sau-{rule}"

    def reset(self, env, horizon, rng) -> None:
        super().reset(env, horizon, rng)
        self.model.reset(self.n_trials, env.n_arms, env.dim, horizon, rng.child("model"))
        self.tracker = SauTracker(self.n_trials, env.n_arms, self.prior_s2)
        if self.rule == "sampling":
            self._z = rng.tape("explore", "normal", (env.n_arms,))

    def predict(self, x):
        self._mu_hat = self.model.predict(x)
        return self._mu_hat

    def act(self, values, step):
        if self.rule == "ucb":
            scores = self.tracker.ucb(values, step, self.ucb_form)
        else:
            scores = self.tracker.sample(values, self._z.next(), step)
        return select_actions(scores, step)

    def update(self, x, arms, rewards):
        rows = np.arange(len(arms))
        self.tracker.record(arms, rewards - self._mu_hat[rows, arms])
        self.model.update(x, arms, rewards)


class EpsilonGreedyPolicy(Policy):
    def __init__(self, model, eps0=0.1, eps_min=0.01, decay_frac=0.2, name="epsilon-greedy"):
        self.model = model
        self.eps0 = eps0
        self.eps_min = eps_min
        self.decay_frac = decay_frac
        self.name = name

    def reset(self, env, horizon, rng) -> None:
        super().reset(env, horizon, rng)
        self.schedule = baselines.EpsilonSchedule.for_horizon(horizon, self.eps0, self.eps_min, self.decay_frac)
        self.model.reset(self.n_trials, env.n_arms, env.dim, horizon, rng.child("model"))
        self._coin = rng.tape("explore", "uniform", (2,))

    def predict(self, x):
        return self.model.predict(x)

    def act(self, values, step):
        greedy = select_actions(values, step)
        u = self._coin.next()
        if step <= self.n_arms:
            return greedy
        explore = u[:, 0] < self.schedule(step)
        random_arm = np.minimum((u[:, 1] * self.n_arms).astype(np.intp), self.n_arms - 1)
        return np.where(explore, random_arm, greedy)

    def update(self, x, arms, rewards):
        self.model.update(x, arms, rewards)


class Ucb1Policy(Policy):
    name = "ucb1"

    def reset(self, env, horizon, rng) -> None:
        super().reset(env, horizon, rng)
        self.model = MeanModel()
        self.model.reset(self.n_trials, env.n_arms, env.dim, horizon, rng)

    def predict(self, x):
        return self.model.predict(x)

    def act(self, values, step):
        if step <= self.n_arms:
            return select_actions(values, step)
        return select_actions(baselines.ucb1_score(values, self.model.counts, step), step)

    def update(self, x, arms, rewards):
        self.model.update(x, arms, rewards)


class BetaTsPolicy(Policy):
    """Beta-Bernoulli Thompson sampling; exploration happens in ``predict``."""

    name = "beta-ts"

    def __init__(self, alpha0: float = 1.0, beta0: float = 1.0):
        self.alpha0 = alpha0
        self.beta0 = beta0

    def reset(self, env, horizon, rng) -> None:
        super().reset(env, horizon, rng)
        self.alpha = np.full((self.n_trials, env.n_arms), float(self.alpha0))
        self.beta = np.full((self.n_trials, env.n_arms), float(self.beta0))
        self._u = rng.tape("posterior", "uniform", (2, env.n_arms))

    def predict(self, x):
        u = self._u.next()
        return baselines.beta_from_uniforms(self.alpha, self.beta, u[:, 0], u[:, 1])

    def act(self, values, step):
        return select_actions(values, step)

    def update(self, x, arms, rewards):
        baselines._check_binary(rewards)
        rows = np.arange(len(arms))
        self.alpha[rows, arms] += rewards
        self.beta[rows, arms] += 1.0 - rewards


class LinearTsPolicy(Policy):
    """Bayesian linear-regression TS with a normal / inverse-gamma posterior per arm.

    ``diag=True`` replaces the posterior covariance by the inverse of the
    precision diagonal.
    """

    def __init__(self, lam: float = 0.25, a0: float = 6.0, b0: float = 6.0, diag: bool = False, name=None):
        self.lam = lam
        self.a0 = a0
        self.b0 = b0
        self.diag = diag
        self.name = name or ("linear-ts-diag" if diag else "linear-ts")

    def reset(self, env, horizon, rng) -> None:
        super().reset(env, horizon, rng)
        t, k, p = self.n_trials, env.n_arms, env.dim
        if p < 1:
            raise ValueError("linear TS needs contexts")
        self.precision = np.broadcast_to(self.lam * np.eye(p), (t, k, p, p)).copy()
        self.moment = np.zeros((t, k, p))
        self.mean = np.zeros((t, k, p))
        self.yty = np.zeros((t, k))
        self.count = np.zeros((t, k))
        # factor F with cov = F F^T (full) or per-coordinate sd (diag)
        if self.diag:
            self.factor = np.full((t, k, p), 1.0 / np.sqrt(self.lam))
        else:
            self.factor = np.broadcast_to(np.eye(p) / np.sqrt(self.lam), (t, k, p, p)).copy()
        self._z = rng.tape("theta", "normal", (k, p))
        self._u = rng.tape("noise", "uniform", (k,))

    def _sample_theta(self) -> np.ndarray:
        a = self.a0 + 0.5 * self.count
        b = baselines.noise_rate(self.b0, self.yty, self.mean, self.moment)
        sigma2 = b / baselines.gamma_from_uniform(a, self._u.next())
        z = self._z.next()
        if self.diag:
            noise = self.factor * z
        else:
            noise = np.einsum("tkij,tkj->tki", self.factor, z)
        return self.mean + np.sqrt(sigma2)[..., None] * noise

    def predict(self, x):
        theta = self._sample_theta()
        return np.einsum("tkp,tp->tk", theta, x)

    def act(self, values, step):
        return select_actions(values, step)

    def update(self, x, arms, rewards):
        rows = np.arange(len(arms))
        idx = (rows, arms)
        prec = self.precision[idx] + x[:, :, None] * x[:, None, :]
        self.precision[idx] = prec
        self.moment[idx] += x * rewards[:, None]
        self.yty[idx] += rewards * rewards
        self.count[idx] += 1
        chol = np.linalg.cholesky(prec)
        y = np.linalg.solve(chol, self.moment[idx][..., None])
        self.mean[idx] = np.linalg.solve(np.swapaxes(chol, -1, -2), y)[..., 0]
        if self.diag:
            self.factor[idx] = 1.0 / np.sqrt(np.diagonal(prec, axis1=-2, axis2=-1))
        else:
            # cov = L^{-T} L^{-1}, so F = L^{-T}
            eye = np.broadcast_to(np.eye(prec.shape[-1]), prec.shape)
            self.factor[idx] = np.swapaxes(np.linalg.solve(chol, eye), -1, -2)


class UniformPolicy(Policy):
    name = "uniform"

    def reset(self, env, horizon, rng) -> None:
        super().reset(env, horizon, rng)
        self._u = rng.tape("choice", "uniform")

    def predict(self, x):
        return np.zeros((self.n_trials, self.n_arms))

    def act(self, values, step):
        return np.minimum((self._u.next() * self.n_arms).astype(np.intp), self.n_arms - 1)


class OraclePolicy(Policy):
    """Plays the arm with the highest expected reward; a zero-regret reference."""

    name = "oracle"

    def reset(self, env, horizon, rng) -> None:
        super().reset(env, horizon, rng)
        self.env = env

    def predict(self, x):
        return self.env.mean_rewards(x)

    def act(self, values, step):
        return np.argmax(values, axis=1)
