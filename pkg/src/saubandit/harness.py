"""Simulation driver, regret accounting and aggregation."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from saubandit.envs.base import Environment, step_regret
from saubandit.policies import Policy
from saubandit.rng import BatchRng

if TYPE_CHECKING:
    from saubandit.config import PolicySpec, RunConfig

log = logging.getLogger(__name__)

CSV_COLUMNS = ("step", "mean_cum_regret", "sem", "policy", "env")


class ConfigError(ValueError):
    """Invalid run configuration; ``key`` names the offending entry when known."""

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


@dataclass
class RegretTrace:
    instantaneous: np.ndarray  # (trials, horizon)
    trials: tuple[int, ...]
    policy: str = ""
    env: str = ""

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.instantaneous, axis=1)

    @property
    def final(self) -> np.ndarray:
        return self.instantaneous.sum(axis=1)

    @property
    def horizon(self) -> int:
        return self.instantaneous.shape[1]


def simulate(
    env: Environment,
    policy: Policy,
    horizon: int,
    seed: int,
    trials: Sequence[int],
    progress: bool = False,
) -> RegretTrace:
    """Run observe -> predict -> act -> update for ``horizon`` steps on a batch of trials.

    The environment streams do not depend on the policy, so policies compared
    under one seed face the same contexts and reward noise.
    """
    rng = BatchRng(seed, trials)
    env.reset(rng.child("env"))
    if env.max_steps is not None and horizon > env.max_steps:
        raise ConfigError(f"horizon {horizon} exceeds the {env.max_steps} rows available", "horizon")
    if horizon < env.n_arms:
        raise ConfigError(f"horizon {horizon} is shorter than the {env.n_arms}-step round-robin", "horizon")
    policy.reset(env, horizon, rng.child(f"policy/{policy.name}"))
    regret = np.empty((rng.size, horizon))
    tick = max(1, horizon // 10)
    for n in range(1, horizon + 1):
        x = env.next_context()
        values = policy.predict(x)
        arms = policy.act(values, n)
        rewards = env.reward(x, arms)
        regret[:, n - 1] = step_regret(env, x, arms)
        policy.update(x, arms, rewards)
        if progress and n % tick == 0:
            log.info("%s: step %d/%d", policy.name, n, horizon)
    return RegretTrace(regret, tuple(rng.trials), policy.name, env.name)


def _run_group(cfg: "RunConfig", spec: "PolicySpec", trials: tuple[int, ...], progress: bool) -> RegretTrace:
    env = cfg.env.build()
    policy = spec.build()
    if spec.arms_required is not None and spec.arms_required != env.n_arms:
        raise ConfigError(
            f"policy expects {spec.arms_required} arms, environment has {env.n_arms}", f"policy.{spec.name}.arms"
        )
    trace = simulate(env, policy, cfg.horizon, cfg.seed, trials, progress)
    trace.policy = spec.name
    trace.env = cfg.env.label
    return trace


def run_trial(cfg: "RunConfig", trial: int, policy: int = 0) -> RegretTrace:
    return _run_group(cfg, cfg.policies[policy], (trial,), False)


def run_policy(cfg: "RunConfig", spec: "PolicySpec", jobs: int = 1, progress: bool = False) -> RegretTrace:
    """All trials of one policy; ``jobs > 1`` splits the trials across processes."""
    trials = tuple(range(cfg.trials))
    jobs = max(1, min(jobs, len(trials)))
    if jobs == 1:
        return _run_group(cfg, spec, trials, progress)
    groups = [tuple(g) for g in np.array_split(np.array(trials), jobs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_run_group, [cfg] * jobs, [spec] * jobs, groups, [False] * jobs))
    return concat(parts)


def concat(traces: Sequence[RegretTrace]) -> RegretTrace:
    if not traces:
        raise ValueError("no traces to combine")
    horizons = {t.horizon for t in traces}
    if len(horizons) != 1:
        raise ValueError(f"ragged horizons: {sorted(horizons)}")
    trials = tuple(i for t in traces for i in t.trials)
    order = np.argsort(trials, kind="stable")
    stacked = np.concatenate([t.instantaneous for t in traces], axis=0)[order]
    return RegretTrace(stacked, tuple(np.array(trials)[order].tolist()), traces[0].policy, traces[0].env)


QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


@dataclass
class Summary:
    mean: np.ndarray
    sem: np.ndarray | None  # None with a single trial
    final: np.ndarray
    policy: str = ""
    env: str = ""
    quantiles: dict[str, float] = field(default_factory=dict)

    @property
    def final_mean(self) -> float:
        return float(self.final.mean())

    @property
    def final_sem(self) -> float | None:
        return None if self.sem is None else float(self.sem[-1])


def aggregate(traces: Sequence[RegretTrace]) -> Summary:
    """Pointwise mean and standard error of cumulative regret across trials."""
    trace = concat(traces)
    cum = trace.cumulative
    n = cum.shape[0]
    mean = cum.mean(axis=0)
    sem = cum.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else None
    final = cum[:, -1]
    quantiles = {f"q{int(q * 100):02d}": float(np.quantile(final, q)) for q in QUANTILES}
    return Summary(mean, sem, final, trace.policy, trace.env, quantiles)


# -- artifacts ---------------------------------------------------------------


def atomic_write(path: str | os.PathLike, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _num(v: float) -> str:
    return repr(float(v))


def summary_csv(summary: Summary) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for i, m in enumerate(summary.mean):
        sem = "" if summary.sem is None else _num(summary.sem[i])
        writer.writerow([i + 1, _num(m), sem, summary.policy, summary.env])
    return buf.getvalue()


def summary_json(summary: Summary, config: dict | None = None) -> str:
    doc = {
        "policy": summary.policy,
        "env": summary.env,
        "trials": int(summary.final.shape[0]),
        "horizon": int(summary.mean.shape[0]),
        "final_mean_cum_regret": summary.final_mean,
        "final_sem": summary.final_sem,
        "final_quantiles": summary.quantiles,
        "config": config or {},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def ranking(summaries: Sequence[Summary]) -> list[tuple[int, str, float, float | None]]:
    """(rank, policy, final mean regret, final SEM), ties broken by policy name."""
    ordered = sorted(summaries, key=lambda s: (s.final_mean, s.policy))
    return [(i + 1, s.policy, s.final_mean, s.final_sem) for i, s in enumerate(ordered)]


def ranking_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("rank", "policy", "final_mean_cum_regret", "final_sem"))
    for rank, policy, mean, sem in rows:
        writer.writerow([rank, policy, _num(mean), "" if sem is None else _num(sem)])
    return buf.getvalue()
