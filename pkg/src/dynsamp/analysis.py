"""Mean squared error of least-squares recovery: trace formula and Monte Carlo.

For a recoverable context the recovery error has covariance
``sigma^2 (A_L^* A_L)^{-1}`` where A_L stacks ``S A^i`` over L time levels, so
its expected squared norm is ``sigma^2 * sum(1 / lambda_j(L))``.

Circulant operators with a spectrum on both sides of 1 make A_L badly graded:
its columns in the eigenbasis scale like ``s_k^i``. Forming the Gram matrix
by repeated products then loses the small eigenvalues completely. Here the
Gram matrix is built in the eigenbasis, where it is a Hadamard product of a
fixed matrix with geometric sums, and its eigenvalues come from a one-sided
Jacobi SVD of a column-scaled Cholesky factor, which is accurate to
componentwise relative precision.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import lapack

from .core import (
    CirculantOperator,
    NumericalError,
    RANK_RTOL,
    SamplingPattern,
    ValidationError,
    as_operator,
)
from .recover import SignalRecovery, apply_threshold
from .simulate import evolve


@dataclass(frozen=True, eq=False)
class GramSpectrum:
    """Eigenvalues of ``sum_{i<L} (A^*)^i S A^i``, descending."""

    eigenvalues: np.ndarray
    L: int
    singular: bool = False

    @property
    def d(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class MsePoint:
    L: int
    formula: float
    monte_carlo: float
    standard_error: float
    trials: int


@dataclass(frozen=True, eq=False)
class MseEstimate:
    """Per time horizon: formula value, Monte Carlo mean and its standard error.

    Values are ``E||f_L - f||^2``; :meth:`normalized` divides by ``sigma^2``.
    """

    points: list
    sigma: float

    @property
    def L(self) -> np.ndarray:
        return np.array([p.L for p in self.points])

    @property
    def formula(self) -> np.ndarray:
        return np.array([p.formula for p in self.points])

    @property
    def monte_carlo(self) -> np.ndarray:
        return np.array([p.monte_carlo for p in self.points])

    @property
    def standard_error(self) -> np.ndarray:
        return np.array([p.standard_error for p in self.points])

    def normalized(self) -> "MseEstimate":
        if self.sigma == 0:
            raise ValidationError("cannot normalize a zero-noise estimate")
        c = self.sigma**2
        pts = [MsePoint(p.L, p.formula / c, p.monte_carlo / c, p.standard_error / c, p.trials)
               for p in self.points]
        return MseEstimate(pts, 1.0)


def lambda_closed_form(s, L: int) -> float:
    """``sum_{i<L} |s|^(2i)``: Gram eigenvalue for eigenvalue s without subsampling."""
    if L < 1:
        raise ValidationError(f"L must be >= 1, got {L}")
    a = abs(s) ** 2
    if a == 1:
        return float(L)
    return float((1 - a**L) / (1 - a))


def geometric_sum(x, L: int) -> np.ndarray:
    """``sum_{i<L} x^i`` elementwise, free of cancellation for positive x."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x > 0
    if pos.any():
        powers = x[pos][..., None] ** np.arange(L)
        out[pos] = powers.sum(axis=-1)
    neg = ~pos
    if neg.any():
        xn = x[neg]
        out[neg] = (1 - xn**L) / (1 - xn)
    return out


def _graded_eigenvalues(H):
    """Eigenvalues of a positive definite H to high relative accuracy, or None.

    None means the unit-diagonal scaling of H is numerically singular, so the
    context is not recoverable at this horizon.
    """
    w = 1 / np.sqrt(np.diag(H))
    Hs = H * np.outer(w, w)
    scaled = np.linalg.eigvalsh(Hs)
    if scaled[0] <= RANK_RTOL * scaled[-1]:
        return None
    C = np.linalg.cholesky(Hs)
    B = np.asfortranarray(C.T / w[None, :])
    sva, _, _, work, _, info = lapack.dgejsv(B, joba=0, jobu=3, jobv=3)
    if info != 0:
        raise NumericalError(f"Jacobi SVD failed with info={info}")
    return (sva * work[0] / work[1]) ** 2


def _circulant_gram(A: CirculantOperator, pattern: SamplingPattern, L: int) -> np.ndarray:
    """Gram matrix in the real eigenbasis, or None if some eigenvector vanishes on the samples."""
    Q, freqs = A.eigenbasis()
    s = A.eigenvalues[freqs]
    rows = Q[list(pattern.indices)]
    P = rows.T @ rows
    # the i = 0 term bounds each diagonal entry below by ||Q[idx, k]||^2,
    # which is O(1/d) unless column k is invisible at every sample
    if np.diag(P).min() <= RANK_RTOL * np.diag(P).max():
        return None
    return P * geometric_sum(np.outer(s, s), L)


def observation_stack(A, pattern: SamplingPattern, L: int) -> np.ndarray:
    """Rows of ``S A^i`` for ``i < L`` stacked, shape ``(L |pattern|, d)``."""
    A = as_operator(A)
    if L < 1:
        raise ValidationError(f"L must be >= 1, got {L}")
    M = np.eye(A.d)[list(pattern.indices)]
    matrix = A.matrix()
    blocks = []
    for _ in range(L):
        blocks.append(M)
        M = M @ matrix
    return np.vstack(blocks)


def gram_matrix(A, pattern: SamplingPattern, L: int) -> np.ndarray:
    """Dense Gram matrix ``sum_{i<L} (A^*)^i S A^i`` in the standard basis."""
    M = observation_stack(A, pattern, L)
    return M.T @ M


def gram_spectrum(A, pattern: SamplingPattern, L: int) -> GramSpectrum:
    A = as_operator(A)
    if L < 1:
        raise ValidationError(f"L must be >= 1, got {L}")
    if pattern.d != A.d:
        raise ValidationError(f"pattern dimension {pattern.d} != operator dimension {A.d}")
    ev = None
    if isinstance(A, CirculantOperator) and pattern.size:
        H = _circulant_gram(A, pattern, L)
        ev = None if H is None else _graded_eigenvalues(H)
        if H is None:
            H = gram_matrix(A, pattern, L)
        if ev is None:
            return GramSpectrum(np.sort(np.clip(np.linalg.eigvalsh(H), 0, None))[::-1], L, True)
        return GramSpectrum(np.sort(ev)[::-1], L, False)
    if ev is None:
        # squared singular values of the stack avoid squaring its condition number
        sv = np.linalg.svd(observation_stack(A, pattern, L), compute_uv=False)
        ev = np.zeros(A.d)
        ev[: sv.size] = sv**2
    ev = np.sort(np.clip(ev, 0, None))[::-1]
    singular = bool(ev[-1] <= 1e-14 * max(ev[0], 1e-300) * A.d)
    return GramSpectrum(ev, L, singular)


def mse_formula(sigma: float, spectrum: GramSpectrum) -> float:
    """``sigma^2 * sum(1 / lambda_j)``."""
    if sigma < 0:
        raise ValidationError(f"sigma must be >= 0, got {sigma}")
    if spectrum.singular or (spectrum.eigenvalues <= 0).any():
        raise NumericalError(f"Gram matrix at L={spectrum.L} is singular: context not recoverable")
    return float(sigma**2 * np.sum(1 / spectrum.eigenvalues))


def _trial(args):
    A, pattern, f, sigma, L_grid, threshold, route, basis, seed = args
    rng = np.random.default_rng(seed)
    L_max = max(L_grid)
    eta = sigma * rng.standard_normal((pattern.size, L_max))
    idx = list(pattern.indices)
    if route == "direct" or threshold:
        clean = evolve(A, f, L_max - 1)[idx]
    if route == "direct":
        data = clean + eta
        if threshold:
            data = apply_threshold(data, sigma)
    elif threshold:
        # the solver is linear and reproduces f from clean data, so solving
        # for thresholded(y + eta) - y and adding f back is the same estimate
        # without forming samples too large to carry the noise
        data = np.where(np.abs(clean + eta) <= 2 * sigma, -clean, eta)
    else:
        data = eta
    rec = SignalRecovery(A, pattern, basis)
    want = set(L_grid)
    out = {}
    for level in range(L_max):
        rec.absorb(data[:, level])
        if level + 1 in want:
            est = rec.estimate()
            if route == "direct":
                err = est - f if not threshold else apply_threshold(est, sigma) - f
            else:
                err = est if not threshold else apply_threshold(f + est, sigma) - f
            out[level + 1] = float(err @ err)
    return [out[L] for L in L_grid]


def monte_carlo_mse(A, pattern: SamplingPattern, f, sigma: float, L_grid: Sequence[int],
                    trials: int = 100, seed: int = 0, threshold: bool = False,
                    route: str = "noise", basis: str = "auto", workers: int = 1) -> MseEstimate:
    """Monte Carlo estimate of ``E||f_L - f||^2`` over the horizons in ``L_grid``.

    A horizon L uses time levels 0..L-1. Each trial draws one noise sequence
    and reuses it for every horizon. ``route="noise"`` feeds the solver the
    effective data error, which is exact for a linear solver and immune to the
    growth of the samples; ``route="direct"`` recovers from literal noisy
    samples and is only meaningful while double precision resolves sigma on
    top of them. With ``threshold=True`` samples and estimates pass through
    :func:`apply_threshold`, so the formula column no longer describes them.
    """
    A = as_operator(A)
    f = np.asarray(f, dtype=float)
    if trials < 2:
        raise ValidationError(f"need at least 2 trials, got {trials}")
    if sigma < 0:
        raise ValidationError(f"sigma must be >= 0, got {sigma}")
    if route not in ("noise", "direct"):
        raise ValidationError(f"unknown route {route!r}")
    L_grid = [int(L) for L in L_grid]
    if not L_grid or min(L_grid) < 1:
        raise ValidationError("L_grid must contain horizons >= 1")
    if f.shape != (A.d,):
        raise ValidationError(f"signal of shape {f.shape} for an operator of size {A.d}")
    formula = [mse_formula(sigma, gram_spectrum(A, pattern, L)) for L in L_grid]
    if sigma == 0:
        pts = [MsePoint(L, v, 0.0, 0.0, trials) for L, v in zip(L_grid, formula)]
        return MseEstimate(pts, sigma)

    seeds = np.random.SeedSequence(seed).spawn(trials)
    tasks = [(A, pattern, f, sigma, L_grid, threshold, route, basis, s) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_trial, tasks, chunksize=max(1, trials // (4 * workers))))
    else:
        rows = [_trial(t) for t in tasks]
    sq = np.array(rows)
    mean = sq.mean(axis=0)
    se = sq.std(axis=0, ddof=1) / np.sqrt(trials)
    pts = [MsePoint(L, fv, float(mv), float(sv), trials)
           for L, fv, mv, sv in zip(L_grid, formula, mean, se)]
    return MseEstimate(pts, sigma)


def relative_error(Z, ref) -> float:
    """``||Z - ref|| / ||ref||`` in the Frobenius (vector 2-) norm."""
    Z = np.asarray(Z)
    ref = np.asarray(ref)
    if Z.shape != ref.shape:
        raise ValidationError(f"shape mismatch {Z.shape} vs {ref.shape}")
    nref = np.linalg.norm(ref)
    if nref == 0:
        raise ValidationError("reference has zero norm")
    return float(np.linalg.norm(Z - ref) / nref)
