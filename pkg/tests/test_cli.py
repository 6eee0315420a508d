import csv
import filecmp
import json

import numpy as np
import pytest

from saubandit.cli import main

CONFIG = """
[run]
name = mini
horizon = {horizon}
trials = 3
seed = 11

[env]
kind = bernoulli
arms = 3
mu_best = 0.6
gap = {gap}

{policies}
"""


def write_config(tmp_path, horizon=120, gap=0.2, policies="[policy.sau]\nkind = sau-sampling\n"):
    path = tmp_path / "run.ini"
    path.write_text(CONFIG.format(horizon=horizon, gap=gap, policies=policies))
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_writes_curve(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", write_config(tmp_path), "--out", str(out)]) == 0
    rows = read_rows(out / "mini__sau.csv")
    assert len(rows) == 120 and rows[0]["step"] == "1" and rows[-1]["step"] == "120"
    means = [float(r["mean_cum_regret"]) for r in rows]
    assert all(b >= a for a, b in zip(means, means[1:]))
    doc = json.loads((out / "mini__sau.json").read_text())
    assert doc["trials"] == 3 and doc["config"]["seed"] == 11


def test_rerun_is_byte_identical(tmp_path):
    cfg = write_config(tmp_path)
    for d in ("a", "b"):
        assert main(["run", "--config", cfg, "--out", str(tmp_path / d)]) == 0
    assert filecmp.cmp(tmp_path / "a" / "mini__sau.csv", tmp_path / "b" / "mini__sau.csv", shallow=False)


def test_seed_override_changes_output(tmp_path):
    cfg = write_config(tmp_path)
    main(["run", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["run", "--config", cfg, "--seed", "12", "--out", str(tmp_path / "b")])
    assert not filecmp.cmp(tmp_path / "a" / "mini__sau.csv", tmp_path / "b" / "mini__sau.csv", shallow=False)


def test_horizon_shorter_than_arms_is_config_error(tmp_path, capsys):
    assert main(["run", "--config", write_config(tmp_path, horizon=2), "--out", str(tmp_path)]) == 2
    assert "run.horizon" in capsys.readouterr().err


def test_unknown_key_is_config_error(tmp_path, capsys):
    cfg = write_config(tmp_path, policies="[policy.sau]\nkind = sau-ucb\nwidth = 3\n")
    assert main(["run", "--config", cfg]) == 2
    assert "policy.sau.width" in capsys.readouterr().err


def test_run_needs_policy_choice(tmp_path, capsys):
    cfg = write_config(tmp_path, policies="[policy.a]\nkind = ucb1\n[policy.b]\nkind = uniform\n")
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert main(["run", "--config", cfg, "--policy", "b", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "mini__b.csv").exists() and not (tmp_path / "mini__a.csv").exists()


def test_compare_zero_gap_ties_ranked_by_name(tmp_path, capsys):
    cfg = write_config(tmp_path, gap=0.0, policies="[policy.zz]\nkind = uniform\n[policy.aa]\nkind = ucb1\n")
    assert main(["compare", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "mini__ranking.csv")
    assert [r["policy"] for r in rows] == ["aa", "zz"]
    assert all(float(r["final_mean_cum_regret"]) == 0.0 for r in rows)


def test_compare_oracle_ranks_first(tmp_path):
    cfg = write_config(tmp_path, policies="[policy.a-uniform]\nkind = uniform\n[policy.z-oracle]\nkind = oracle\n")
    assert main(["compare", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "mini__ranking.csv")
    assert rows[0]["policy"] == "z-oracle" and float(rows[0]["final_mean_cum_regret"]) == 0.0


def test_reproduce_preset_overrides(tmp_path):
    args = ["reproduce", "appendixA-bernoulli", "--trials", "2", "--horizon", "50", "--out", str(tmp_path)]
    assert main(args) == 0
    assert len(read_rows(tmp_path / "appendixA-bernoulli__ucb1.csv")) == 50
    assert len(read_rows(tmp_path / "appendixA-bernoulli__ranking.csv")) == 4


def test_prop_check_2_passes(tmp_path, capsys):
    assert main(["prop-check", "2", "--n-a", "100", "--out", str(tmp_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] and report["measured"]["mse"] == pytest.approx(0.0025)
    assert (tmp_path / "prop-check-2.json").exists()


def test_prop_check_4_singular_design_fails(tmp_path, capsys):
    design = np.ones((10, 3))
    path = tmp_path / "design.csv"
    np.savetxt(path, design, delimiter=",")
    assert main(["prop-check", "4", "--design", str(path)]) == 1
    assert "singular" in json.loads(capsys.readouterr().out)["error"]


def test_prop_check_4_default_passes(capsys):
    assert main(["prop-check", "4", "--redraws", "4000"]) == 0


def test_prop_check_tau_convergence(capsys):
    assert main(["prop-check", "tau-convergence"]) == 0
    assert json.loads(capsys.readouterr().out)["passed"]


def test_prop_check_log_regret_from_curve(tmp_path, capsys):
    n = np.arange(1, 2001)
    path = tmp_path / "curve.csv"
    lines = ["step,mean_cum_regret"] + [f"{i},{2.5 * np.log(i):.17g}" for i in n]
    path.write_text("\n".join(lines) + "\n")
    assert main(["prop-check", "log-regret", "--curve", str(path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["measured"]["slope"] == pytest.approx(2.5)

    lines = ["step,mean_cum_regret"] + [f"{i},{0.1 * i:.17g}" for i in n]
    path.write_text("\n".join(lines) + "\n")
    assert main(["prop-check", "log-regret", "--curve", str(path), "--burn-in", "0"]) == 1


def test_bad_seed_rejected_by_argparse():
    with pytest.raises(SystemExit) as err:
        main(["prop-check", "2", "--seed", "-3"])
    assert err.value.code == 2
