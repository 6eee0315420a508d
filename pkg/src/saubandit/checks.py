"""Monte-Carlo checks of the SAU residual identities and of regret growth.

Each check returns a report dataclass with the measured quantities, the
tolerance band it was judged against and a ``passed`` flag.  Monte-Carlo
draws are vectorised over trials and come from one seeded generator.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from saubandit.linear import LinearArmModel, leverage
from saubandit.rng import RngStream


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    return RngStream(int(rng or 0), 0, "checks").generator


def _sem(x: np.ndarray) -> float:
    return float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0


@dataclass
class CheckReport:
    check: str
    passed: bool
    params: dict = field(default_factory=dict)
    measured: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _bernoulli_state(n_a: int, mu: float, trials: int, gen: np.random.Generator):
    """Successes after ``n_a`` pulls and one fresh reward, per trial."""
    successes = gen.binomial(n_a, mu, size=trials)
    fresh = (gen.random(trials) < mu).astype(float)
    return successes.astype(float), fresh


def _check_bernoulli_args(n_a: int, mu: float, trials: int, minimum: int = 1) -> None:
    if n_a < minimum:
        raise ValueError(f"n_a must be >= {minimum}, got {n_a}")
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    if trials < 2:
        raise ValueError("need at least two Monte-Carlo trials")


def exact_prop1(n_a: int, mu: float = 0.5, alpha0: float = 1.0, beta0: float = 1.0) -> tuple[float, float]:
    """Exact E[V_hat] and E[e^2 / n_a] by summing over the binomial success count."""
    s = np.arange(n_a + 1)
    pmf = stats.binom.pmf(s, n_a, mu)
    a, b = alpha0 + s, beta0 + n_a - s
    v_hat = float(pmf @ (a * b / ((a + b) ** 2 * (a + b + 1))))
    e2 = mu * (1 - mu) * (1 + 1 / n_a) / n_a
    return v_hat, e2


def check_prop1(
    n_a: int = 500,
    trials: int = 10_000,
    rng=None,
    mu: float = 0.5,
    alpha0: float = 1.0,
    beta0: float = 1.0,
    const: float = 10.0,
) -> CheckReport:
    """Beta-posterior variance vs the scaled squared residual after ``n_a`` pulls.

    The posterior and the sample mean are taken at decision time, before the
    fresh reward that forms the residual.
    """
    _check_bernoulli_args(n_a, mu, trials, minimum=10)
    gen = _generator(rng)
    s, r = _bernoulli_state(n_a, mu, trials, gen)
    a, b = alpha0 + s, beta0 + n_a - s
    v_hat = a * b / ((a + b) ** 2 * (a + b + 1))
    e2 = (r - s / n_a) ** 2 / n_a
    diff = v_hat - e2
    sem = _sem(diff)
    band = const / n_a**2 + 3 * sem
    exact_v, exact_e2 = exact_prop1(n_a, mu, alpha0, beta0)
    return CheckReport(
        "prop1",
        bool(abs(diff.mean()) <= band),
        {"n_a": n_a, "trials": trials, "mu": mu, "alpha0": alpha0, "beta0": beta0},
        {
            "mean_v_hat": float(v_hat.mean()),
            "mean_e2_over_n": float(e2.mean()),
            "diff": float(diff.mean()),
            "sem": sem,
            "band": band,
            "exact_diff": exact_v - exact_e2,
        },
    )


def check_prop2(
    n_a: int = 100,
    trials: int = 10_000,
    rng=None,
    mu: float = 0.5,
    const: float = 10.0,
) -> CheckReport:
    """Scaled squared residual vs the sample-mean MSE ``mu (1 - mu) / n_a``."""
    _check_bernoulli_args(n_a, mu, trials)
    gen = _generator(rng)
    s, r = _bernoulli_state(n_a, mu, trials, gen)
    e2 = (r - s / n_a) ** 2 / n_a
    mse = mu * (1 - mu) / n_a
    sem = _sem(e2)
    band = const / n_a**2 + 3 * sem
    diff = float(e2.mean()) - mse
    return CheckReport(
        "prop2",
        bool(abs(diff) <= band),
        {"n_a": n_a, "trials": trials, "mu": mu},
        {"mean_e2_over_n": float(e2.mean()), "mse": mse, "diff": diff, "sem": sem, "band": band},
    )


# relative floor for squared roundoff, so a noiseless design still passes
_ROUNDOFF = 1e-24


def gaussian_design(n_a: int, p: int, rng=None) -> np.ndarray:
    return _generator(rng).standard_normal((n_a, p))


def check_prop4(
    design: np.ndarray | None = None,
    sigma2: float = 0.25,
    redraws: int = 10_000,
    rng=None,
    n_a: int = 200,
    p: int = 5,
) -> CheckReport:
    """In-sample least-squares residual at the last design row vs ``(1 - h) sigma2 / n_a``.

    ``design`` defaults to an ``n_a x p`` standard Gaussian matrix.  Raises
    ``numpy.linalg.LinAlgError`` when the design is rank deficient.
    """
    gen = _generator(rng)
    if design is None:
        design = gaussian_design(n_a, p, gen)
    design = np.asarray(design, dtype=float)
    if design.ndim != 2:
        raise ValueError("design must be a 2-d matrix")
    n_a, p = design.shape
    if n_a < p:
        raise np.linalg.LinAlgError(f"design has {n_a} rows for {p} parameters; least squares is singular")
    if sigma2 < 0:
        raise ValueError("sigma2 must be non-negative")
    if redraws < 2:
        raise ValueError("need at least two noise redraws")

    gram = design.T @ design
    model = LinearArmModel(gram, np.zeros(p), np.zeros(p), lam=0.0)
    x_n = design[-1]
    h = leverage(model, x_n).h
    if np.linalg.cond(gram) > 1e12:
        raise np.linalg.LinAlgError("design is numerically singular")

    theta = gen.standard_normal(p)
    noise = math.sqrt(sigma2) * gen.standard_normal((n_a, redraws))
    y = (design @ theta)[:, None] + noise
    theta_hat = np.linalg.solve(gram, design.T @ y)
    e = y[-1] - x_n @ theta_hat
    e2 = e * e / n_a
    predicted = (1 - h) * sigma2 / n_a
    sem = _sem(e2)
    diff = float(e2.mean()) - predicted
    signal = (design @ theta)[:, None]
    band = 3 * sem + _ROUNDOFF * (1.0 + float(np.max(signal**2)))
    return CheckReport(
        "prop4",
        bool(abs(diff) <= band),
        {"n_a": n_a, "p": p, "sigma2": sigma2, "redraws": redraws},
        {
            "leverage": h,
            "mse": h * sigma2,
            "mean_e2_over_n": float(e2.mean()),
            "predicted": predicted,
            "diff": diff,
            "sem": sem,
            "band": band,
        },
    )


def tau2_paths(rewards: np.ndarray, form: str = "prefix", prior_s2: float = 0.0) -> np.ndarray:
    """Final tau^2 for each row of ``rewards`` (trials x n_a).

    ``prefix`` measures each reward against the running mean that includes
    it; ``sequential`` measures it against the mean of earlier rewards (the
    first one against a zero prediction), as the online rule does.
    """
    n_a = rewards.shape[1]
    steps = np.arange(1, n_a + 1)
    running = np.cumsum(rewards, axis=1) / steps
    if form == "prefix":
        resid = rewards - running
    elif form == "sequential":
        before = np.concatenate([np.zeros((rewards.shape[0], 1)), running[:, :-1]], axis=1)
        resid = rewards - before
    else:
        raise ValueError(f"unknown tau form {form!r}")
    return (prior_s2 + np.sum(resid * resid, axis=1)) / n_a


def check_tau_convergence(
    n_a: int = 10_000,
    trials: int = 200,
    rng=None,
    mu: float = 0.5,
    form: str = "prefix",
    prior_s2: float = 0.0,
) -> CheckReport:
    """|mean tau^2 - sigma^2| against ``sigma^2 (1 + log(1 + n_a)) / n_a + 3 SEM``."""
    _check_bernoulli_args(n_a, mu, trials)
    gen = _generator(rng)
    rewards = (gen.random((trials, n_a)) < mu).astype(float)
    tau2 = tau2_paths(rewards, form, prior_s2)
    sigma2 = mu * (1 - mu)
    sem = _sem(tau2)
    bound = sigma2 * (1 + math.log1p(n_a)) / n_a
    diff = float(tau2.mean()) - sigma2
    return CheckReport(
        "tau-convergence",
        bool(abs(diff) <= bound + 3 * sem),
        {"n_a": n_a, "trials": trials, "mu": mu, "form": form, "prior_s2": prior_s2},
        {"mean_tau2": float(tau2.mean()), "sigma2": sigma2, "diff": diff, "sem": sem, "bound": bound},
    )


def check_tau_concentration(
    n_values: tuple[int, ...] = (100, 1000, 10_000),
    trials: int = 200,
    rng=None,
    mu: float = 0.3,
    slack: float = 2.0,
) -> CheckReport:
    """Spread of tau^2 across trials shrinks at least like ``n_a^(-1/2)``.

    ``sd(n) * sqrt(n)`` at every ``n`` must stay within ``slack`` times its
    value at the smallest ``n``; an empirical stand-in for a concentration
    constant that cannot be computed.
    """
    gen = _generator(rng)
    n_values = tuple(sorted(n_values))
    rewards = (gen.random((trials, n_values[-1])) < mu).astype(float)
    scaled = []
    for n in n_values:
        tau2 = tau2_paths(rewards[:, :n], "prefix")
        scaled.append(float(tau2.std(ddof=1) * math.sqrt(n)))
    ok = all(s <= slack * scaled[0] for s in scaled[1:])
    return CheckReport(
        "tau-concentration",
        bool(ok),
        {"n_values": list(n_values), "trials": trials, "mu": mu, "slack": slack},
        {"scaled_sd": scaled},
    )


def check_log_regret(
    mean_cum_regret: np.ndarray,
    burn_in: int | None = None,
    min_r2: float = 0.95,
) -> CheckReport:
    """Least-squares fit of cumulative regret on ``log n`` for steps after ``burn_in``.

    ``burn_in`` defaults to 10% of the horizon.
    """
    curve = np.asarray(mean_cum_regret, dtype=float)
    horizon = curve.shape[0]
    if burn_in is None:
        burn_in = horizon // 10
    if burn_in < 0 or horizon < 10 * burn_in or horizon - burn_in < 3:
        raise ValueError(f"horizon {horizon} too short for burn-in {burn_in}")
    n = np.arange(burn_in + 1, horizon + 1)
    x = np.log(n)
    y = curve[burn_in:]
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return CheckReport(
        "log-regret",
        bool(r2 >= min_r2),
        {"horizon": horizon, "burn_in": burn_in, "min_r2": min_r2},
        {"slope": float(slope), "intercept": float(intercept), "r2": r2},
    )


CHECKS = {
    "1": check_prop1,
    "2": check_prop2,
    "4": check_prop4,
    "tau-convergence": check_tau_convergence,
    "tau-concentration": check_tau_concentration,
}
