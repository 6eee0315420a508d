import numpy as np
import pytest

from saubandit.checks import check_prop4
from saubandit.linear import LinearArmModel, leverage, linear_predict, linear_update
from saubandit.rng import RngStream


def test_single_ridge_update():
    m = linear_update(LinearArmModel.empty(3, lam=1.0), np.array([1.0, 0, 0]), 2.0)
    assert np.allclose(m.theta, [1.0, 0, 0])


def test_orthogonal_design_pure_least_squares():
    m = LinearArmModel.empty(2, lam=0.0)
    m = linear_update(m, np.array([1.0, 0.0]), 1.0)
    m = linear_update(m, np.array([0.0, 1.0]), 3.0)
    assert np.allclose(m.theta, [1.0, 3.0])


def test_recovers_theta_and_solves_normal_equations():
    gen = np.random.default_rng(1)
    theta = gen.standard_normal(5)
    x = gen.standard_normal((2000, 5))
    r = x @ theta + 0.5 * gen.standard_normal(2000)
    m = LinearArmModel.empty(5)
    for xi, ri in zip(x, r):
        m = linear_update(m, xi, ri)
    assert np.linalg.norm(m.theta - theta) <= 0.1
    resid = np.linalg.norm(m.gram @ m.theta - m.xty) / np.linalg.norm(m.xty)
    assert resid <= 1e-9


def test_predict_examples():
    assert linear_predict(LinearArmModel.empty(4), np.ones(4)) == 0.0
    m = LinearArmModel(np.eye(2), np.zeros(2), np.array([1.0, -1.0]))
    assert linear_predict(m, np.array([2.0, 3.0])) == -1.0


def test_predict_matches_dense_solve():
    gen = np.random.default_rng(2)
    x = gen.standard_normal((30, 6))
    r = gen.standard_normal(30)
    m = LinearArmModel.empty(6, lam=0.5)
    for xi, ri in zip(x, r):
        m = linear_update(m, xi, ri)
    q = gen.standard_normal(6)
    oracle = q @ np.linalg.lstsq(x.T @ x + 0.5 * np.eye(6), x.T @ r, rcond=None)[0]
    assert linear_predict(m, q) == pytest.approx(oracle, rel=1e-9)


def test_dimension_errors():
    m = LinearArmModel.empty(3)
    with pytest.raises(ValueError):
        linear_update(m, np.ones(2), 1.0)
    with pytest.raises(ValueError):
        linear_predict(m, np.ones(4))


def test_batched_update_matches_single():
    gen = np.random.default_rng(3)
    batch = LinearArmModel.empty(3, batch=(4,))
    singles = [LinearArmModel.empty(3) for _ in range(4)]
    for _ in range(10):
        x, r = gen.standard_normal((4, 3)), gen.standard_normal(4)
        batch = linear_update(batch, x, r)
        singles = [linear_update(s, x[i], r[i]) for i, s in enumerate(singles)]
    assert np.allclose(batch.theta, np.stack([s.theta for s in singles]))


def test_leverage_examples():
    assert leverage(LinearArmModel.empty(3), np.array([1.0, 0, 0])).h == 1.0
    m = LinearArmModel(2 * np.eye(3), np.zeros(3), np.zeros(3))
    report = leverage(m, np.array([1.0, 0, 0]), sigma2=0.5)
    assert report.h == 0.5 and report.mse == 0.25


def test_leverage_trace_equals_p():
    design = np.random.default_rng(4).standard_normal((5, 3))
    m = LinearArmModel.empty(3, lam=0.0)
    for row in design:
        m = linear_update(m, row, 0.0)
    h = [leverage(m, row).h for row in design]
    assert sum(h) == pytest.approx(3.0)
    assert all(0 <= v <= 1 for v in h)


def test_leverage_singular():
    m = linear_update(LinearArmModel.empty(3, lam=0.0), np.array([1.0, 0, 0]), 1.0)
    with pytest.raises(np.linalg.LinAlgError):
        leverage(m, np.ones(3))


def test_balanced_design_leverage():
    # n_a copies of one point: h = 1 / n_a
    design = np.ones((8, 1))
    report = check_prop4(design, 0.25, 2000, RngStream(0))
    assert report.measured["leverage"] == pytest.approx(1 / 8)
    assert report.passed


def test_prop4_gaussian_design():
    report = check_prop4(None, 0.25, 10_000, RngStream(1), n_a=200, p=5)
    assert report.passed


def test_prop4_zero_noise():
    report = check_prop4(None, 0.0, 100, RngStream(2), n_a=20, p=3)
    assert report.measured["mean_e2_over_n"] == pytest.approx(0.0, abs=1e-20)
    assert report.measured["predicted"] == 0.0
    assert report.passed


def test_prop4_singular_design():
    design = np.zeros((10, 3))
    design[:, 0] = 1.0
    with pytest.raises(np.linalg.LinAlgError):
        check_prop4(design, 0.25, 100, RngStream(3))


def test_in_sample_residual_vanishes_without_noise():
    gen = np.random.default_rng(5)
    theta = gen.standard_normal(4)
    x = gen.standard_normal((12, 4))
    m = LinearArmModel.empty(4, lam=1e-12)
    for xi in x:
        m = linear_update(m, xi, xi @ theta)
    assert np.max(np.abs(x @ m.theta - x @ theta)) <= 1e-6
