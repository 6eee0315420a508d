"""Incremental (ridge) least squares per arm, with leverage diagnostics.

All functions accept arrays with arbitrary leading batch dimensions, so the
same code serves one arm or a ``(trials, arms)`` block of them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LinearArmModel:
    gram: np.ndarray  # (..., p, p) = sum x x^T + lam I
    xty: np.ndarray  # (..., p)
    theta: np.ndarray  # (..., p)
    lam: float = 1.0

    @classmethod
    def empty(cls, p: int, lam: float = 1.0, batch: tuple[int, ...] = ()) -> "LinearArmModel":
        if lam < 0:
            raise ValueError("ridge offset must be non-negative")
        gram = np.broadcast_to(lam * np.eye(p), (*batch, p, p)).copy()
        return cls(gram, np.zeros((*batch, p)), np.zeros((*batch, p)), lam)

    @property
    def dim(self) -> int:
        return self.gram.shape[-1]

    def take(self, index) -> "LinearArmModel":
        return LinearArmModel(self.gram[index], self.xty[index], self.theta[index], self.lam)

    def put(self, index, sub: "LinearArmModel") -> None:
        self.gram[index] = sub.gram
        self.xty[index] = sub.xty
        self.theta[index] = sub.theta


def _check_dim(m: LinearArmModel, x: np.ndarray) -> None:
    if x.shape[-1] != m.dim:
        raise ValueError(f"context has dimension {x.shape[-1]}, model expects {m.dim}")


def solve_spd(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``gram @ theta = rhs`` through a Cholesky factor.

    Falls back to the minimum-norm least-squares solution when ``gram`` is
    singular (pure least squares with fewer observations than dimensions).
    """
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        return (np.linalg.pinv(gram) @ rhs[..., None])[..., 0]
    z = np.linalg.solve(chol, rhs[..., None])
    return np.linalg.solve(np.swapaxes(chol, -1, -2), z)[..., 0]


def linear_update(m: LinearArmModel, x, r) -> LinearArmModel:
    x = np.asarray(x, dtype=float)
    _check_dim(m, x)
    r = np.asarray(r, dtype=float)
    gram = m.gram + x[..., :, None] * x[..., None, :]
    xty = m.xty + x * r[..., None]
    return LinearArmModel(gram, xty, solve_spd(gram, xty), m.lam)


def linear_predict(m: LinearArmModel, x):
    x = np.asarray(x, dtype=float)
    _check_dim(m, x)
    return np.sum(x * m.theta, axis=-1)


@dataclass(frozen=True)
class LeverageReport:
    h: float
    mse: float | None = None


def leverage(m: LinearArmModel, x, sigma2: float | None = None) -> LeverageReport:
    """Leverage ``h = x^T gram^{-1} x``; with ``sigma2`` also the prediction MSE ``h * sigma2``."""
    x = np.asarray(x, dtype=float)
    _check_dim(m, x)
    try:
        np.linalg.cholesky(m.gram)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("gram matrix is singular; leverage is undefined") from exc
    h = float(x @ np.linalg.solve(m.gram, x))
    return LeverageReport(h=h, mse=None if sigma2 is None else h * sigma2)
