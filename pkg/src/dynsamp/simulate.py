"""Trajectories, additive Gaussian noise, sampling and temporal block smoothing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SamplingPattern, ValidationError, as_operator, subsample

KINDS = ("clean", "noisy", "denoised")


@dataclass(frozen=True)
class NoiseModel:
    """I.i.d. zero-mean Gaussian noise; ``sigma`` is the standard deviation."""

    sigma: float
    seed: int = 0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValidationError(f"noise sigma must be >= 0, got {self.sigma}")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass(frozen=True, eq=False)
class MeasurementSeries:
    """Sampled values: rows are retained locations, columns are time levels 0..L."""

    values: np.ndarray
    pattern: SamplingPattern
    kind: str = "clean"

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[1] < 1:
            raise ValidationError(f"series must be a 2-D array with at least one column, got {v.shape}")
        if v.shape[0] != self.pattern.size:
            raise ValidationError(
                f"series has {v.shape[0]} rows but the pattern retains {self.pattern.size} locations"
            )
        if self.kind not in KINDS:
            raise ValidationError(f"unknown series kind {self.kind!r}")
        object.__setattr__(self, "values", v)

    @property
    def levels(self) -> int:
        """Number of time levels (L + 1)."""
        return self.values.shape[1]

    def with_values(self, values, kind: str | None = None) -> "MeasurementSeries":
        return MeasurementSeries(values, self.pattern, kind or self.kind)


def evolve(A, f, L: int) -> np.ndarray:
    """d x (L+1) matrix whose column n is A applied n times to f."""
    A = as_operator(A)
    f = np.asarray(f)
    if f.shape != (A.d,):
        raise ValidationError(f"signal of shape {f.shape} for an operator of size {A.d}")
    if L < 0:
        raise ValidationError(f"L must be >= 0, got {L}")
    out = np.empty((A.d, L + 1), dtype=np.result_type(f, float))
    out[:, 0] = f
    for n in range(1, L + 1):
        out[:, n] = A.apply(out[:, n - 1])
    return out


def add_noise(X, noise: NoiseModel) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if noise.sigma < 0:
        raise ValidationError(f"noise sigma must be >= 0, got {noise.sigma}")
    if noise.sigma == 0:
        return X.copy()
    return X + noise.sigma * noise.rng().standard_normal(X.shape)


def measure(X, pattern: SamplingPattern, kind: str = "clean") -> MeasurementSeries:
    """Subsample every time level of a full d x T trajectory."""
    return MeasurementSeries(subsample(X, pattern), pattern, kind)


def block_aggregate(X, block: int, mode: str = "mean") -> np.ndarray:
    """Sum or average consecutive groups of ``block`` columns.

    Output column k aggregates input columns ``k*block .. k*block + block - 1``;
    a trailing partial block is dropped.
    """
    X = np.asarray(X)
    if block < 1:
        raise ValidationError(f"block must be a positive integer, got {block}")
    if mode not in ("sum", "mean"):
        raise ValidationError(f"unknown aggregation mode {mode!r}")
    if X.ndim != 2 or X.shape[1] < block:
        raise ValidationError(f"need at least {block} columns, got shape {X.shape}")
    n = X.shape[1] // block
    groups = X[:, : n * block].reshape(X.shape[0], n, block)
    return groups.sum(axis=2) if mode == "sum" else groups.mean(axis=2)
