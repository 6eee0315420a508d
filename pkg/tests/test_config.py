import pytest

from saubandit.config import ConfigError, parse_config
from saubandit.policies import EpsilonGreedyPolicy, LinearModel, NeuralModel, SauPolicy

BASE = """
[run]
name = demo
horizon = 100
trials = 2
seed = 9

[env]
kind = linear
arms = 3
dim = 2
"""


def parse(extra, base=BASE):
    return parse_config(base + extra)


def key_of(text, base=BASE):
    with pytest.raises(ConfigError) as err:
        parse(text, base)
    return err.value.key


def test_valid_config_builds_policies():
    cfg = parse(
        "[policy.a]\nkind = sau-ucb\nmodel = linear\nlam = 2\n"
        "[policy.b]\nkind = epsilon-greedy\nmodel = neural\nhidden = 8,8\ntrain_every = 5\n"
    )
    a, b = (s.build() for s in cfg.policies)
    assert isinstance(a, SauPolicy) and isinstance(a.model, LinearModel) and a.model.lam == 2.0
    assert isinstance(b, EpsilonGreedyPolicy) and isinstance(b.model, NeuralModel)
    assert b.model.hidden == (8, 8) and b.model.train_every == 5
    assert cfg.to_dict()["policies"]["b"]["hidden"] == [8, 8]


def test_unknown_key_is_named():
    assert key_of("[policy.a]\nkind = ucb1\nbogus = 1\n") == "policy.a.bogus"
    assert key_of("[policy.a]\nkind = ucb1\n", BASE.replace("seed = 9", "seed = 9\ncolour = red")) == "run.colour"


def test_model_keys_need_matching_model():
    assert key_of("[policy.a]\nkind = sau-ucb\nlam = 2\n") == "policy.a.lam"
    assert key_of("[policy.a]\nkind = sau-ucb\nmodel = linear\nhidden = 4\n") == "policy.a.hidden"


def test_unknown_section_and_kinds():
    assert key_of("[policy.a]\nkind = ucb1\n[extra]\nx = 1\n") == "extra"
    assert key_of("[policy.a]\nkind = magic\n") == "policy.a.kind"
    assert key_of("[policy.a]\nkind = ucb1\n", BASE.replace("kind = linear", "kind = maze")) == "env.kind"


def test_bad_values():
    assert key_of("[policy.a]\nkind = ucb1\n", BASE.replace("horizon = 100", "horizon = ten")) == "run.horizon"
    assert key_of("[policy.a]\nkind = ucb1\n", BASE.replace("seed = 9", "seed = -1")) == "run.seed"
    assert key_of("[policy.a]\nkind = sau-ucb\nucb_form = cube\n") == "policy.a.ucb_form"


def test_horizon_shorter_than_arms():
    assert key_of("[policy.a]\nkind = ucb1\n", BASE.replace("horizon = 100", "horizon = 2")) == "run.horizon"


def test_arm_count_mismatch():
    assert key_of("[policy.a]\nkind = ucb1\narms = 4\n") == "policy.a.arms"


def test_policy_environment_compatibility():
    assert key_of("[policy.a]\nkind = beta-ts\n") == "policy.a.kind"
    mab = BASE.replace("kind = linear\narms = 3\ndim = 2", "kind = bernoulli\narms = 3")
    assert key_of("[policy.a]\nkind = linear-ts\n", mab) == "policy.a.kind"
    assert key_of("[policy.a]\nkind = sau-ucb\nmodel = linear\n", mab) == "policy.a.model"


def test_duplicate_key_and_missing_parts():
    assert key_of("[policy.a]\nkind = ucb1\nkind = ucb1\n") == "policy.a.kind"
    assert key_of("") == "policy"
    with pytest.raises(ConfigError):
        parse_config("[env]\nkind = bernoulli\n[policy.a]\nkind = ucb1\n")


def test_dataset_env_and_horizon_limit():
    base = "[run]\nhorizon = 50\n[env]\nkind = dataset\nname = statlog\nrows = 60\n[policy.u]\nkind = uniform\n"
    cfg = parse_config(base)
    assert cfg.env.build().dim == 9
    with pytest.raises(ConfigError) as err:
        parse_config(base.replace("horizon = 50", "horizon = 61"))
    assert err.value.key == "run.horizon"
