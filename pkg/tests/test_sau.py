import math

import numpy as np
import pytest

from saubandit.checks import tau2_paths
from saubandit.rng import RngStream
from saubandit.sau import (
    ArmState,
    SauTracker,
    UninitializedArmError,
    residual,
    sampling_score,
    sau_update,
    select_action,
    select_actions,
    ucb_score,
)


@pytest.mark.parametrize("r, mu, e", [(1, 1, 0), (1, 0.25, 0.75), (0, -0.5, 0.5)])
def test_residual(r, mu, e):
    assert residual(r, mu) == e


def test_sau_update_examples():
    s = sau_update(ArmState(), 0.0)
    assert (s.n, s.s2, s.tau2) == (1, 1.0, 1.0)
    s = sau_update(ArmState(), 0.5)
    assert (s.n, s.s2, s.tau2) == (1, 1.25, 1.25)
    s = ArmState()
    for e in (1, 1, 1):
        s = sau_update(s, e)
    assert s.tau2 == pytest.approx(4 / 3)


def test_tau2_undefined_before_first_pull():
    assert math.isnan(ArmState().tau2)


def test_ucb_score_examples():
    assert ucb_score(0.5, ArmState(1, 0.7), 1) == 0.5
    assert ucb_score(0.0, ArmState(1, 1.0), math.e) == pytest.approx(1.0)
    # tau2 = 1/4 -> s2 = 1 at n_a = 4
    assert ucb_score(0.5, ArmState(4, 1.0), math.e**4) == pytest.approx(1.0)


def test_ucb_tau_form():
    # sqrt(tau * log n / n_a) with tau = 0.5, n_a = 1, n = e -> sqrt(0.5)
    assert ucb_score(0.0, ArmState(1, 0.25), math.e, form="tau") == pytest.approx(math.sqrt(0.5))
    with pytest.raises(ValueError):
        ucb_score(0.0, ArmState(1, 1.0), 3, form="bogus")


def test_ucb_monotonicity():
    assert ucb_score(0, ArmState(3, 2.0), 10) < ucb_score(0, ArmState(3, 2.0), 11)
    assert ucb_score(0, ArmState(4, 2.0), 10) < ucb_score(0, ArmState(3, 2.0), 10)


def test_uninitialized_arm():
    with pytest.raises(UninitializedArmError):
        ucb_score(0.0, ArmState(), 5)
    with pytest.raises(UninitializedArmError):
        sampling_score(0.0, ArmState(), RngStream(0))


def test_sampling_score_degenerate():
    assert sampling_score(1.5, ArmState(3, 0.0), RngStream(0)) == 1.5


def test_sampling_score_variance():
    rng = RngStream(1)
    # tau2 = 1 at n_a = 100 -> variance 0.01
    draws = np.array([sampling_score(0.0, ArmState(100, 100.0), rng) for _ in range(100_000)])
    assert abs(draws.var(ddof=1) - 0.01) <= 0.0005


def test_sampling_score_mean():
    rng = RngStream(2)
    # tau2 = 4 at n_a = 4 -> variance 1
    draws = np.array([sampling_score(2.0, ArmState(4, 16.0), rng) for _ in range(100_000)])
    assert abs(draws.mean() - 2.0) <= 3 / math.sqrt(1e5)


def test_select_action():
    assert select_action([9.0, 0, 0, 0, 0], step=2) == 1  # round-robin: arm 2 (0-based 1)
    assert select_action([0.1, 0.9, 0.3], step=10) == 1
    assert select_action([0.5, 0.5], step=10) == 0
    with pytest.raises(ValueError):
        select_action([], step=1)


def test_argmax_shift_invariance():
    rng = np.random.default_rng(0)
    mu = rng.standard_normal((20, 4))
    tracker = SauTracker(20, 4)
    tracker.record(np.repeat(np.arange(4), 5), rng.standard_normal(20))
    for _ in range(3):
        tracker.record(rng.integers(0, 4, 20), rng.standard_normal(20))
    z = rng.standard_normal((20, 4))
    for score in (lambda m: tracker.ucb(m, 50), lambda m: tracker.sample(m, z, 50)):
        assert np.array_equal(select_actions(score(mu), 50), select_actions(score(mu + 3.7), 50))


def test_tracker_matches_scalar_update():
    tracker = SauTracker(1, 2)
    state = ArmState()
    for e in (0.3, -1.2, 0.7):
        tracker.record(np.array([1]), np.array([e]))
        state = sau_update(state, e)
    assert tracker.tau2[0, 1] == pytest.approx(state.tau2)
    assert math.isnan(tracker.tau2[0, 0])


def test_tau2_stability():
    gen = RngStream(3).generator
    rewards = (gen.random((200, 1000)) < 0.5).astype(float)
    tau2 = tau2_paths(rewards)
    spread = np.abs(tau2 - tau2.mean())
    assert np.mean(spread > 4 / math.sqrt(1000)) < 0.05


@pytest.mark.parametrize("n_a", [100, 1000])
def test_tau2_convergence_known_mean(n_a):
    # residuals against the true mean: E[tau2] = sigma2 up to Monte-Carlo error
    mu, sigma2, trials = 0.5, 0.25, 2000
    gen = RngStream(n_a).generator
    r = (gen.random((trials, n_a)) < mu).astype(float)
    tau2 = np.mean((r - mu) ** 2, axis=1)
    sem = tau2.std(ddof=1) / math.sqrt(trials)
    assert abs(tau2.mean() - sigma2) <= sigma2 * (1 + math.log1p(n_a)) / n_a + 3 * sem
