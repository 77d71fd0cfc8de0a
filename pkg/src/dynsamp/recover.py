"""Least-squares signal recovery from dynamical samples.

The streaming solver keeps only a d x d triangular factor and a reduced
right-hand side. Each new block of equations is folded into the factor with
Householder reflections that touch one row of R and the new rows, so the cost
per block is O(d^2 m) and memory does not grow with the number of blocks.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.linalg import solve_triangular

from .core import (
    NumericalError,
    RANK_RTOL,
    SamplingPattern,
    ValidationError,
    as_operator,
    sampled_blocks,
)
from .simulate import MeasurementSeries

DIAG_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class StreamingLsqState:
    R: np.ndarray
    rhs: np.ndarray
    rows_seen: int = 0
    full_rank: bool = False

    @classmethod
    def empty(cls, d: int, dtype=float) -> "StreamingLsqState":
        return cls(np.zeros((d, d), dtype=dtype), np.zeros(d, dtype=dtype))

    @property
    def d(self) -> int:
        return self.R.shape[0]

    @property
    def size(self) -> int:
        """Number of stored scalars (d^2 + d), independent of rows absorbed."""
        return self.R.size + self.rhs.size

    def deficient_columns(self) -> int:
        return int(np.count_nonzero(_deficient(self.R)))


def _deficient(R) -> np.ndarray:
    # pivot small relative to its own column: invariant under column scaling,
    # which matters because the columns of graded stacks differ by many orders
    col = np.linalg.norm(R, axis=0)
    return np.abs(np.diag(R)) <= DIAG_RTOL * col


def lsq_update(state: StreamingLsqState, A_i, b_i) -> StreamingLsqState:
    """Absorb the equations ``A_i g = b_i`` into the triangular factor.

    Equivalent to re-factoring the stack ``[R; A_i]`` and setting the new
    right-hand side to ``Q^* [rhs; b_i]``.
    """
    B = np.atleast_2d(np.asarray(A_i))
    y = np.atleast_1d(np.asarray(b_i))
    d = state.d
    if B.ndim != 2 or B.shape[1] != d:
        raise ValidationError(f"block has shape {B.shape}, expected (*, {d})")
    if y.shape != (B.shape[0],):
        raise ValidationError(f"right-hand side of shape {y.shape} for a block with {B.shape[0]} rows")

    dtype = np.result_type(state.R, B, y, float)
    R = state.R.astype(dtype, copy=True)
    rhs = state.rhs.astype(dtype, copy=True)
    B = B.astype(dtype, copy=True)
    y = y.astype(dtype, copy=True)

    for k in range(d):
        col = B[:, k].copy()
        tail = np.linalg.norm(col)
        if tail == 0:
            continue
        x0 = R[k, k]
        norm = np.hypot(abs(x0), tail)
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        alpha = -phase * norm
        v0 = x0 - alpha
        scale = 2.0 / (abs(v0) ** 2 + tail**2)

        w = scale * (np.conj(v0) * R[k, k:] + col.conj() @ B[:, k:])
        R[k, k:] -= v0 * w
        B[:, k:] -= np.outer(col, w)
        wy = scale * (np.conj(v0) * rhs[k] + col.conj() @ y)
        rhs[k] -= v0 * wy
        y -= col * wy

        R[k, k] = alpha
        B[:, k] = 0

    full = not _deficient(R).any()
    return StreamingLsqState(R, rhs, state.rows_seen + B.shape[0], full)


def lsq_solve(state: StreamingLsqState) -> np.ndarray:
    """Back-substitute ``R x = rhs``."""
    if not state.full_rank:
        n = state.deficient_columns()
        raise NumericalError(
            f"least-squares state is rank deficient: {n} of {state.d} columns undetermined "
            f"after {state.rows_seen} equations"
        )
    return solve_triangular(state.R, state.rhs, lower=False)


def batch_lsq(blocks: Iterable) -> np.ndarray:
    """Solve the stacked problem directly with the pseudoinverse."""
    blocks = list(blocks)
    if not blocks:
        raise ValidationError("no blocks given")
    M = np.vstack([np.atleast_2d(np.asarray(a)) for a, _ in blocks])
    b = np.concatenate([np.atleast_1d(np.asarray(v)) for _, v in blocks])
    if b.shape[0] != M.shape[0]:
        raise ValidationError("blocks and right-hand sides have mismatched row counts")
    sv = np.linalg.svd(M, compute_uv=False)
    rank = int(np.count_nonzero(sv > RANK_RTOL * sv[0])) if sv[0] > 0 else 0
    if rank < M.shape[1]:
        raise NumericalError(f"stacked matrix has rank {rank} < {M.shape[1]}")
    return np.linalg.pinv(M) @ b


def apply_threshold(x, sigma: float) -> np.ndarray:
    """Zero every entry with magnitude at most ``2 * sigma``."""
    if sigma < 0:
        raise ValidationError(f"sigma must be >= 0, got {sigma}")
    x = np.asarray(x)
    return np.where(np.abs(x) <= 2 * sigma, np.zeros_like(x), x)


class SignalRecovery:
    """Streaming estimate of the initial state from samples at time levels 0, 1, ...

    Feed one time level at a time with :meth:`absorb`; :meth:`estimate` is
    available as soon as the absorbed levels determine the signal.
    """

    def __init__(self, A, pattern: SamplingPattern, basis: str = "auto"):
        self.A = as_operator(A)
        self.pattern = pattern
        self._blocks, self._Q = sampled_blocks(self.A, pattern, basis)
        self.state = StreamingLsqState.empty(self.A.d)
        self.levels = 0

    def absorb(self, samples) -> None:
        samples = np.asarray(samples)
        if samples.shape != (self.pattern.size,):
            raise ValidationError(f"expected {self.pattern.size} samples, got shape {samples.shape}")
        self.state = lsq_update(self.state, next(self._blocks), samples)
        self.levels += 1

    def estimate(self) -> np.ndarray:
        u = lsq_solve(self.state)
        return u if self._Q is None else self._Q @ u


def recover_signal(A, series: MeasurementSeries, L: int | None = None,
                   threshold_sigma: float | None = None, basis: str = "auto") -> np.ndarray:
    """Least-squares initial state from time levels 0..L of ``series``.

    With ``threshold_sigma`` the samples and the estimate are both passed
    through :func:`apply_threshold`, the post-processor for sparse signals.
    """
    values = series.values
    if L is None:
        L = values.shape[1] - 1
    if not 0 <= L < values.shape[1]:
        raise ValidationError(f"L={L} outside the available levels 0..{values.shape[1] - 1}")
    if threshold_sigma is not None:
        values = apply_threshold(values, threshold_sigma)
    rec = SignalRecovery(A, series.pattern, basis)
    for n in range(L + 1):
        rec.absorb(values[:, n])
    f = rec.estimate()
    if threshold_sigma is not None:
        f = apply_threshold(f, threshold_sigma)
    return f
