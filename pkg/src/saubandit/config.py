"""INI-style run configuration with strict key validation.

Example::

    [run]
    name = figure1-a
    horizon = 20000
    trials = 100
    seed = 7

    [env]
    kind = linear
    arms = 5
    dim = 5

    [policy.sau-ucb]
    kind = sau-ucb
    model = linear

Unknown sections or keys are errors, never silently ignored.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

from saubandit import policies as P
from saubandit.envs import LinearEnvSpec, bernoulli_env, dataset_env, linear_env, uniform_threshold_env
from saubandit.envs.datasets import DATASETS
from saubandit.harness import ConfigError


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise ValueError("must be an unsigned 64-bit integer")
    return value


def _pos_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError("must be a positive integer")
    return value


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError("must be a boolean")


def _int_tuple(text: str) -> tuple[int, ...]:
    values = tuple(int(v) for v in text.split(",") if v.strip())
    if not values or any(v < 1 for v in values):
        raise ValueError("must be a comma-separated list of positive integers")
    return values


def _choice(*options: str) -> Callable[[str], str]:
    def convert(text: str) -> str:
        if text not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return text

    return convert


PRESETS = ("figure1-a", "figure1-b", "figure1-c", "appendixA-bernoulli", "table1-statlog-desk")

RUN_KEYS = {"name": str, "horizon": _pos_int, "trials": _pos_int, "seed": _u64, "output": str}

ENV_KEYS: dict[str, dict[str, Callable]] = {
    "bernoulli": {"arms": _pos_int, "mu_best": float, "gap": float},
    "uniform-threshold": {"arms": _pos_int, "mu_best": float, "gap": float},
    "linear": {
        "arms": _pos_int,
        "dim": _pos_int,
        "noise_sd": float,
        "context": _choice("gaussian", "ar1", "t"),
        "context_rho": float,
        "t_df": _pos_int,
        "t_cap": float,
        "theta": _choice("uniform", "gaussian"),
        "errors": _choice("iid", "ar1"),
        "error_rho": float,
    },
    "dataset": {
        "name": _choice(*DATASETS),
        "source": str,
        "rows": _pos_int,
        "fixture_seed": int,
        "standardize": _bool,
    },
}

_MODEL = {"model": _choice("mean", "linear", "neural")}
_LINEAR_MODEL = {"lam": float}
_NEURAL_MODEL = {"hidden": _int_tuple, "lr": float, "train_every": _pos_int, "train_steps": int, "batch": _pos_int}
_COMMON = {"arms": _pos_int}

POLICY_KEYS: dict[str, dict[str, Callable]] = {
    "sau-ucb": {**_MODEL, "prior_s2": float, "ucb_form": _choice("tau2", "tau")},
    "sau-sampling": {**_MODEL, "prior_s2": float},
    "epsilon-greedy": {**_MODEL, "eps0": float, "eps_min": float, "decay_frac": float},
    "ucb1": {},
    "beta-ts": {"alpha0": float, "beta0": float},
    "linear-ts": {"lam": float, "a0": float, "b0": float},
    "linear-ts-diag": {"lam": float, "a0": float, "b0": float},
    "uniform": {},
    "oracle": {},
}
_MODEL_POLICIES = ("sau-ucb", "sau-sampling", "epsilon-greedy")


@dataclass(frozen=True)
class EnvSpec:
    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    base_dir: str = "."

    @property
    def label(self) -> str:
        if self.kind == "dataset":
            return f"dataset-{self.params['name']}"
        return self.kind

    def build(self):
        p = self.params
        if self.kind in ("bernoulli", "uniform-threshold"):
            make = bernoulli_env if self.kind == "bernoulli" else uniform_threshold_env
            try:
                return make(p.get("arms", 10), p.get("mu_best", 0.5), p.get("gap", 0.1))
            except ValueError as exc:
                raise ConfigError(str(exc), "env.gap") from None
        if self.kind == "linear":
            try:
                spec = LinearEnvSpec(
                    n_arms=p.get("arms", 5),
                    dim=p.get("dim", 5),
                    noise_sd=p.get("noise_sd", 0.5),
                    context_dist=p.get("context", "gaussian"),
                    context_rho=p.get("context_rho", 0.5),
                    t_df=p.get("t_df", 2),
                    t_cap=p.get("t_cap", 5.0),
                    theta_dist=p.get("theta", "uniform"),
                    error_corr=p.get("errors", "iid"),
                    error_rho=p.get("error_rho", 0.5),
                )
            except ValueError as exc:
                raise ConfigError(str(exc), "env") from None
            return linear_env(spec)
        if self.kind == "dataset":
            source = p.get("source", "synthetic")
            if source != "synthetic" and not os.path.isabs(source):
                source = os.path.join(self.base_dir, source)
            return dataset_env(
                p["name"],
                source,
                rows=p.get("rows", 2000),
                fixture_seed=p.get("fixture_seed", 0),
                standardize=p.get("standardize", True),
            )
        raise ConfigError(f"unknown environment kind {self.kind!r}", "env.kind")


@dataclass(frozen=True)
class PolicySpec:
    name: str
    kind: str
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def arms_required(self) -> int | None:
        return self.params.get("arms")

    def _model(self):
        p = self.params
        kind = p.get("model", "mean")
        if kind == "linear":
            return P.LinearModel(lam=p.get("lam", 1.0))
        if kind == "neural":
            return P.NeuralModel(
                hidden=p.get("hidden", (100, 100)),
                lr=p.get("lr", 0.003),
                train_every=p.get("train_every", 20),
                train_steps=p.get("train_steps", 10),
                batch=p.get("batch", 64),
            )
        return P.MeanModel()

    def build(self) -> P.Policy:
        p = self.params
        if self.kind == "sau-ucb":
            return P.SauPolicy(
                self._model(), "ucb", p.get("prior_s2", 1.0), p.get("ucb_form", "tau2"), name=self.name
            )
        if self.kind == "sau-sampling":
            return P.SauPolicy(self._model(), "sampling", p.get("prior_s2", 1.0), name=self.name)
        if self.kind == "epsilon-greedy":
            return P.EpsilonGreedyPolicy(
                self._model(), p.get("eps0", 0.1), p.get("eps_min", 0.01), p.get("decay_frac", 0.2), name=self.name
            )
        if self.kind in ("linear-ts", "linear-ts-diag"):
            return P.LinearTsPolicy(
                p.get("lam", 0.25), p.get("a0", 6.0), p.get("b0", 6.0), diag=self.kind.endswith("diag"), name=self.name
            )
        simple = {"ucb1": P.Ucb1Policy, "uniform": P.UniformPolicy, "oracle": P.OraclePolicy}
        if self.kind == "beta-ts":
            policy = P.BetaTsPolicy(p.get("alpha0", 1.0), p.get("beta0", 1.0))
        elif self.kind in simple:
            policy = simple[self.kind]()
        else:
            raise ConfigError(f"unknown policy kind {self.kind!r}", f"policy.{self.name}.kind")
        policy.name = self.name
        return policy


@dataclass(frozen=True)
class RunConfig:
    name: str
    env: EnvSpec
    policies: tuple[PolicySpec, ...]
    horizon: int
    trials: int = 1
    seed: int = 0
    output: str | None = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "horizon": self.horizon,
            "trials": self.trials,
            "seed": self.seed,
            "env": {"kind": self.env.kind, **_plain(self.env.params)},
            "policies": {p.name: {"kind": p.kind, **_plain(p.params)} for p in self.policies},
        }


def _plain(params: dict) -> dict:
    return {k: list(v) if isinstance(v, tuple) else v for k, v in params.items()}


def _convert(section: str, key: str, text: str, converter: Callable) -> Any:
    try:
        return converter(text.strip())
    except ValueError as exc:
        raise ConfigError(f"invalid value {text!r} ({exc})", f"{section}.{key}") from None


def _read_section(parser, section: str, allowed: dict[str, Callable], skip=("kind",)) -> dict[str, Any]:
    out = {}
    for key, text in parser.items(section):
        if key in skip:
            continue
        if key not in allowed:
            raise ConfigError("unknown key", f"{section}.{key}")
        out[key] = _convert(section, key, text, allowed[key])
    return out


def _policy_keys(kind: str, model: str | None) -> dict[str, Callable]:
    keys = {**_COMMON, **POLICY_KEYS[kind]}
    if kind in _MODEL_POLICIES:
        if model == "linear":
            keys.update(_LINEAR_MODEL)
        elif model == "neural":
            keys.update(_NEURAL_MODEL)
    return keys


def parse_config(text: str, base_dir: str = ".") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, strict=True, default_section="__none__")
    try:
        parser.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", f"{exc.section}.{exc.option}") from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError("duplicate section", exc.section) from None
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc.message}") from None

    for section in parser.sections():
        if section not in ("run", "env") and not section.startswith("policy."):
            raise ConfigError("unknown section", section)
    for required in ("run", "env"):
        if not parser.has_section(required):
            raise ConfigError("missing section", required)

    run = _read_section(parser, "run", RUN_KEYS, skip=())
    if "horizon" not in run:
        raise ConfigError("missing key", "run.horizon")

    env_kind = parser.get("env", "kind", fallback=None)
    if env_kind not in ENV_KEYS:
        raise ConfigError(f"must be one of {', '.join(ENV_KEYS)}", "env.kind")
    env_params = _read_section(parser, "env", ENV_KEYS[env_kind])
    if env_kind == "dataset" and "name" not in env_params:
        raise ConfigError("missing key", "env.name")
    env = EnvSpec(env_kind, env_params, base_dir)

    specs = []
    for section in parser.sections():
        if not section.startswith("policy."):
            continue
        name = section.split(".", 1)[1]
        if not name:
            raise ConfigError("policy section needs a name", section)
        kind = parser.get(section, "kind", fallback=None)
        if kind not in POLICY_KEYS:
            raise ConfigError(f"must be one of {', '.join(POLICY_KEYS)}", f"{section}.kind")
        model = parser.get(section, "model", fallback=None)
        params = _read_section(parser, section, _policy_keys(kind, model))
        specs.append(PolicySpec(name, kind, params))
    if not specs:
        raise ConfigError("no [policy.NAME] section", "policy")

    cfg = RunConfig(
        name=run.get("name", "run"),
        env=env,
        policies=tuple(specs),
        horizon=run["horizon"],
        trials=run.get("trials", 1),
        seed=run.get("seed", 0),
        output=run.get("output"),
    )
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    """Checks that need the built environment (arm counts, horizon)."""
    env = cfg.env.build()
    if cfg.horizon < env.n_arms:
        raise ConfigError(f"horizon {cfg.horizon} is shorter than the arm count {env.n_arms}", "run.horizon")
    if env.max_steps is not None and cfg.horizon > env.max_steps:
        raise ConfigError(f"horizon {cfg.horizon} exceeds the {env.max_steps} dataset rows", "run.horizon")
    if cfg.trials > 2**16:
        raise ConfigError("at most 65536 trials", "run.trials")
    for spec in cfg.policies:
        if spec.arms_required is not None and spec.arms_required != env.n_arms:
            raise ConfigError(
                f"policy expects {spec.arms_required} arms, environment has {env.n_arms}", f"policy.{spec.name}.arms"
            )
        if spec.kind == "beta-ts" and cfg.env.kind not in ("bernoulli", "uniform-threshold"):
            raise ConfigError("beta-ts needs binary rewards", f"policy.{spec.name}.kind")
        if spec.kind.startswith("linear-ts") and env.dim < 1:
            raise ConfigError("linear-ts needs a contextual environment", f"policy.{spec.name}.kind")
        if spec.params.get("model") in ("linear", "neural") and env.dim < 1:
            raise ConfigError("model needs a contextual environment", f"policy.{spec.name}.model")


def load_config(path: str | os.PathLike) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))


__all__ = ["PRESETS", "ConfigError", "EnvSpec", "PolicySpec", "RunConfig", "load_config", "parse_config", "validate", "asdict"]
