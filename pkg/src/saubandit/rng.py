"""Seeded random streams.

Every random draw in the package comes from a stream derived from
``(master_seed, trial, purpose)``.  Streams for different trials or
purposes never share generator state, so a trial replays identically no
matter which other trials run next to it.
"""

from __future__ import annotations

import math
import zlib
from typing import Sequence

import numpy as np

MAX_TRIALS = 2**16

# Pre-draw budget per tape refill, counted in scalars per trial.
_TAPE_BUDGET = 16384


def _purpose_key(purpose: str) -> int:
    return zlib.crc32(purpose.encode("utf-8"))


def _seed_sequence(master_seed: int, trial: int, purpose: str) -> np.random.SeedSequence:
    if not 0 <= master_seed < 2**64:
        raise ValueError(f"master seed must be an unsigned 64-bit integer, got {master_seed}")
    if not 0 <= trial < MAX_TRIALS:
        raise ValueError(f"trial index out of range: {trial}")
    return np.random.SeedSequence(master_seed, spawn_key=(trial, _purpose_key(purpose)))


class RngStream:
    """A single-owner random source with the scalar draws the library needs."""

    def __init__(self, seed: int, trial: int = 0, purpose: str = "default"):
        self.seed = seed
        self.trial = trial
        self.purpose = purpose
        self.generator = np.random.Generator(np.random.PCG64(_seed_sequence(seed, trial, purpose)))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, trial={self.trial}, purpose={self.purpose!r})"

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        if not lo < hi:
            raise ValueError(f"invalid range: lo={lo} must be < hi={hi}")
        value = lo + (hi - lo) * self.generator.random()
        # guard against rounding up to hi for wide ranges
        return value if value < hi else math.nextafter(hi, lo)

    def gaussian(self, mean: float = 0.0, var: float = 1.0) -> float:
        if var < 0:
            raise ValueError(f"variance must be non-negative, got {var}")
        if var == 0:
            return float(mean)
        return float(mean + math.sqrt(var) * self.generator.standard_normal())

    def gamma(self, shape: float, scale: float = 1.0) -> float:
        if shape <= 0 or scale <= 0:
            raise ValueError(f"gamma parameters must be positive, got shape={shape}, scale={scale}")
        return float(self.generator.standard_gamma(shape) * scale)

    def beta(self, alpha: float, beta: float) -> float:
        """Beta draw built from the ratio of two independent gamma draws."""
        if alpha <= 0 or beta <= 0:
            raise ValueError(f"beta parameters must be positive, got alpha={alpha}, beta={beta}")
        x = self.generator.standard_gamma(alpha)
        y = self.generator.standard_gamma(beta)
        total = x + y
        if total == 0.0:
            # both gammas underflowed; only reachable for tiny shapes
            return 0.5
        return float(x / total)

    def student_t_truncated(self, df: int, cap: float) -> float:
        """Student-t draw hard-clipped to ``[-cap, cap]``."""
        if int(df) != df or df < 1:
            raise ValueError(f"df must be a positive integer, got {df}")
        if cap <= 0:
            raise ValueError(f"cap must be positive, got {cap}")
        return float(np.clip(self.generator.standard_t(df), -cap, cap))

    def integer(self, high: int) -> int:
        if high < 1:
            raise ValueError("need at least one outcome")
        return int(self.generator.integers(high))


def derive_stream(master_seed: int, trial: int, purpose: str) -> RngStream:
    return RngStream(master_seed, trial, purpose)


class Tape:
    """Pre-drawn block of per-trial draws, served one step at a time.

    Each trial owns its generator, and the values a trial sees do not depend
    on how many other trials are in the batch or on the refill size.
    """

    def __init__(self, generators: Sequence[np.random.Generator], kind: str, shape: tuple[int, ...]):
        if kind not in ("uniform", "normal"):
            raise ValueError(f"unknown tape kind {kind!r}")
        self.generators = list(generators)
        self.kind = kind
        self.shape = tuple(shape)
        size = max(1, math.prod(self.shape))
        self.chunk = max(1, min(1024, _TAPE_BUDGET // size))
        self._block: np.ndarray | None = None
        self._pos = 0

    def _refill(self) -> None:
        draw_shape = (self.chunk, *self.shape)
        if self.kind == "uniform":
            parts = [g.random(draw_shape) for g in self.generators]
        else:
            parts = [g.standard_normal(draw_shape) for g in self.generators]
        # (chunk, T, *shape)
        self._block = np.stack(parts, axis=1)
        self._pos = 0

    def next(self) -> np.ndarray:
        if self._block is None or self._pos >= self.chunk:
            self._refill()
        out = self._block[self._pos]
        self._pos += 1
        return out


class BatchRng:
    """Per-trial streams for a batch of trials, scoped by a purpose prefix."""

    def __init__(self, master_seed: int, trials: Sequence[int], purpose: str = ""):
        self.master_seed = master_seed
        self.trials = tuple(int(t) for t in trials)
        if not self.trials:
            raise ValueError("a batch needs at least one trial")
        if len(set(self.trials)) != len(self.trials):
            raise ValueError("duplicate trial indices in batch")
        self.purpose = purpose

    @property
    def size(self) -> int:
        return len(self.trials)

    def _tag(self, name: str) -> str:
        return f"{self.purpose}/{name}" if self.purpose else name

    def child(self, name: str) -> "BatchRng":
        return BatchRng(self.master_seed, self.trials, self._tag(name))

    def streams(self, name: str) -> list[RngStream]:
        return [RngStream(self.master_seed, t, self._tag(name)) for t in self.trials]

    def generators(self, name: str) -> list[np.random.Generator]:
        return [s.generator for s in self.streams(name)]

    def tape(self, name: str, kind: str, shape: tuple[int, ...] = ()) -> Tape:
        return Tape(self.generators(name), kind, shape)
