"""Small ReLU MLP value network with manual backprop, Adam, and a replay buffer.

Parameters may carry leading batch axes (one network per trial), in which
case inputs are shaped ``(*lead, B, in)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)


@dataclass
class Mlp:
    weights: list[np.ndarray]  # (*lead, fan_in, fan_out)
    biases: list[np.ndarray]  # (*lead, fan_out)

    @classmethod
    def init(cls, sizes, generators=None, seed: int | None = None) -> "Mlp":
        """Uniform(+-1/sqrt(fan_in)) init.

        With ``generators`` (one per trial) the parameters get a leading trial
        axis; otherwise a single network is drawn from ``seed``.
        """
        single = generators is None
        gens = [np.random.default_rng(seed)] if single else list(generators)
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = 1.0 / math.sqrt(fan_in)
            w = np.stack([g.uniform(-bound, bound, (fan_in, fan_out)) for g in gens])
            b = np.stack([g.uniform(-bound, bound, fan_out) for g in gens])
            weights.append(w[0] if single else w)
            biases.append(b[0] if single else b)
        return cls(weights, biases)

    @property
    def params(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]

    @property
    def n_outputs(self) -> int:
        return self.weights[-1].shape[-1]

    def copy(self) -> "Mlp":
        return Mlp([w.copy() for w in self.weights], [b.copy() for b in self.biases])


def _forward(net: Mlp, x: np.ndarray):
    acts = [x]
    h = x
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ w + b[..., None, :]
        h = z if i == last else np.maximum(z, 0.0)
        acts.append(h)
    return acts


def forward(net: Mlp, x) -> np.ndarray:
    """Per-arm values; ``x`` may be a single context ``(in,)`` or ``(*lead, B, in)``."""
    x = np.asarray(x, dtype=float)
    fan_in = net.weights[0].shape[-2]
    if x.shape[-1] != fan_in:
        raise ValueError(f"input has dimension {x.shape[-1]}, network expects {fan_in}")
    if x.ndim == 1:
        return _forward(net, x[None, :])[-1][0]
    return _forward(net, x)[-1]


def loss_and_grad(net: Mlp, x, a, r):
    """Loss ``0.5 * mean_B (r - out[a])^2`` and its gradients, per leading index.

    Only the output head of the taken action receives error signal.
    """
    x = np.asarray(x, dtype=float)
    a = np.asarray(a)
    r = np.asarray(r, dtype=float)
    if x.ndim == 1:
        x, a, r = x[None, :], a[None], r[None]
    acts = _forward(net, x)
    out = acts[-1]
    pred = np.take_along_axis(out, a[..., None], axis=-1)[..., 0]
    diff = pred - r
    batch = x.shape[-2]
    loss = 0.5 * np.mean(diff * diff, axis=-1)

    delta = np.zeros_like(out)
    np.put_along_axis(delta, a[..., None], (diff / batch)[..., None], axis=-1)
    grad_w = [None] * len(net.weights)
    grad_b = [None] * len(net.biases)
    for i in range(len(net.weights) - 1, -1, -1):
        h_in = acts[i]
        grad_w[i] = np.swapaxes(h_in, -1, -2) @ delta
        grad_b[i] = delta.sum(axis=-2)
        if i > 0:
            delta = (delta @ np.swapaxes(net.weights[i], -1, -2)) * (acts[i] > 0)
    return loss, [*grad_w, *grad_b]


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    lr: float = 0.003
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0

    @classmethod
    def for_net(cls, net: Mlp, lr: float = 0.003, beta1: float = 0.9, beta2: float = 0.999) -> "AdamState":
        return cls([np.zeros_like(p) for p in net.params], [np.zeros_like(p) for p in net.params], lr, beta1, beta2)


def adam_step(net: Mlp, st: AdamState, grads) -> tuple[Mlp, AdamState]:
    """Bias-corrected Adam update, applied in place."""
    params = net.params
    if len(grads) != len(params):
        raise ValueError("gradient list does not match parameter list")
    st.step += 1
    bc1 = 1.0 - st.beta1**st.step
    bc2 = 1.0 - st.beta2**st.step
    for p, g, m, v in zip(params, grads, st.m, st.v):
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        m *= st.beta1
        m += (1.0 - st.beta1) * g
        v *= st.beta2
        v += (1.0 - st.beta2) * (g * g)
        p -= st.lr * (m / bc1) / (np.sqrt(v / bc2) + st.eps)
    return net, st


@dataclass
class ReplayBuffer:
    """Append-only (context, action, reward) store, one row block per trial."""

    n_trials: int
    dim: int
    capacity: int
    contexts: np.ndarray = field(init=False)
    actions: np.ndarray = field(init=False)
    rewards: np.ndarray = field(init=False)
    size: int = 0

    def __post_init__(self):
        self.contexts = np.zeros((self.n_trials, self.capacity, self.dim))
        self.actions = np.zeros((self.n_trials, self.capacity), dtype=np.intp)
        self.rewards = np.zeros((self.n_trials, self.capacity))

    def add(self, x: np.ndarray, a: np.ndarray, r: np.ndarray) -> None:
        if self.size >= self.capacity:
            raise OverflowError("replay buffer is full")
        self.contexts[:, self.size] = x
        self.actions[:, self.size] = a
        self.rewards[:, self.size] = r
        self.size += 1

    def sample(self, u: np.ndarray):
        """Uniform-with-replacement rows from per-trial uniforms ``u`` of shape (T, B)."""
        idx = np.minimum((u * self.size).astype(np.intp), self.size - 1)
        rows = np.arange(self.n_trials)[:, None]
        return self.contexts[rows, idx], self.actions[rows, idx], self.rewards[rows, idx]


def train_burst(net: Mlp, st: AdamState, buf: ReplayBuffer, t_s: int, batch: int, tape) -> tuple[Mlp, AdamState]:
    """Run ``t_s`` Adam steps on mini-batches drawn from ``buf``.

    ``tape`` yields per-trial uniforms of shape ``(T, batch)``.
    """
    if buf.size == 0:
        log.debug("replay buffer empty; skipping training burst")
        return net, st
    for _ in range(t_s):
        x, a, r = buf.sample(tape.next())
        _, grads = loss_and_grad(net, x, a, r)
        adam_step(net, st, grads)
    return net, st
