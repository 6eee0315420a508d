import math

import numpy as np
import pytest

from saubandit import checks
from saubandit.rng import RngStream


def test_prop2_examples():
    for n_a in (100, 1000):
        r = checks.check_prop2(n_a, 10_000, RngStream(n_a))
        assert r.passed
        assert r.measured["mse"] == pytest.approx(0.25 / n_a)


def test_prop2_degenerate_arm():
    r = checks.check_prop2(100, 1000, RngStream(0), mu=1.0)
    assert r.measured["mean_e2_over_n"] == 0.0 and r.measured["mse"] == 0.0 and r.passed


def test_prop1_examples():
    r = checks.check_prop1(100, 10_000, RngStream(1))
    assert r.passed


def test_prop1_difference_shrinks_quadratically():
    d100 = checks.exact_prop1(100)
    d1000 = checks.exact_prop1(1000)
    ratio = (d100[0] - d100[1]) / (d1000[0] - d1000[1])
    assert 100 / 4 <= ratio <= 100 * 4


def test_prop1_degenerate_arm():
    r = checks.check_prop1(100, 1000, RngStream(2), mu=0.0)
    assert r.measured["mean_e2_over_n"] == 0.0
    # only the prior keeps V_hat away from zero: 1 * 101 / (102^2 * 103)
    assert r.measured["mean_v_hat"] == pytest.approx(101 / (102**2 * 103))
    assert r.passed


def test_prop1_precondition():
    with pytest.raises(ValueError):
        checks.check_prop1(5, 100, RngStream(0))


def test_tau_convergence_band():
    r = checks.check_tau_convergence(10_000, 200, RngStream(3))
    assert r.passed
    assert r.measured["bound"] == pytest.approx(0.25 * (1 + math.log(10_001)) / 10_000)


def test_tau_prefix_form_matches_expectation():
    # E[tau2] = sigma2 (1 - H_n / n) for the prefix-mean residuals
    n, trials = 200, 4000
    gen = RngStream(4).generator
    tau2 = checks.tau2_paths((gen.random((trials, n)) < 0.3).astype(float))
    harmonic = sum(1 / j for j in range(1, n + 1))
    expected = 0.21 * (1 - harmonic / n)
    assert abs(tau2.mean() - expected) <= 3 * tau2.std(ddof=1) / math.sqrt(trials)


def test_tau_concentration():
    assert checks.check_tau_concentration(rng=RngStream(5)).passed


def test_log_regret_exact_log():
    n = np.arange(1, 5001)
    r = checks.check_log_regret(3.0 * np.log(n))
    assert r.measured["r2"] == pytest.approx(1.0)
    assert r.measured["slope"] == pytest.approx(3.0)
    assert r.passed


def test_log_regret_linear_curve_flagged():
    n = np.arange(1, 5001, dtype=float)
    r = checks.check_log_regret(0.1 * n, burn_in=0)
    assert r.measured["r2"] < 0.9 and not r.passed
    # with the default 10% burn-in the fit is still below the acceptance threshold
    assert not checks.check_log_regret(0.1 * n).passed


def test_log_regret_precondition():
    with pytest.raises(ValueError):
        checks.check_log_regret(np.arange(50.0), burn_in=10)
