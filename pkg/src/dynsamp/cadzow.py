"""Cadzow denoising: alternate rank truncation and Hankel averaging per DFT bin."""
from __future__ import annotations

import warnings
from typing import Optional

import numpy as np
from scipy.linalg import hankel

from .core import ValidationError, dft
from .simulate import MeasurementSeries
from .spectrum import _check_uniform, fixed_rank

K_MAX = 25
EXIT_RTOL = 1e-12


def hankel_from_sequence(seq) -> np.ndarray:
    """Square Hankel matrix ``H[p, q] = seq[p + q]``; ``seq`` must have odd length."""
    seq = np.asarray(seq)
    n = seq.size
    if n % 2 == 0:
        raise ValidationError(f"need an odd-length sequence for a square Hankel matrix, got {n}")
    h = n // 2 + 1
    return hankel(seq[:h], seq[h - 1:])


def antidiagonal_means(X) -> np.ndarray:
    """Average of each anti-diagonal, indexed by ``p + q``."""
    X = np.asarray(X)
    p, q = np.indices(X.shape)
    s = (p + q).ravel()
    counts = np.bincount(s)
    if np.iscomplexobj(X):
        re = np.bincount(s, X.real.ravel())
        im = np.bincount(s, X.imag.ravel())
        return (re + 1j * im) / counts
    return np.bincount(s, X.ravel()) / counts


def truncate_rank(X, r: int) -> np.ndarray:
    U, sv, Vh = np.linalg.svd(X, full_matrices=False)
    return (U[:, :r] * sv[:r]) @ Vh[:r]


def cadzow_project(X, r: int) -> np.ndarray:
    """One Cadzow step: best rank-r approximation, then back onto Hankel matrices."""
    X = np.asarray(X)
    if r < 1:
        raise ValidationError(f"rank must be >= 1, got {r}")
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValidationError(f"need a square matrix, got shape {X.shape}")
    return hankel_from_sequence(antidiagonal_means(truncate_rank(X, r)))


def _hankel_index(n: int) -> np.ndarray:
    h = n // 2 + 1
    return np.add.outer(np.arange(h), np.arange(h))


def cadzow_sequence(seq, r, k_max: int = K_MAX, tol: float = EXIT_RTOL) -> np.ndarray:
    """Cadzow iterations on the Hankel matrices of one or more sequences.

    ``seq`` is a single sequence or a stack (one per row) with ``r`` a scalar
    or one rank per row. Iteration stops after ``k_max`` projections or once
    every sequence changes by at most ``tol`` relative.
    """
    seq = np.asarray(seq)
    single = seq.ndim == 1
    S = np.atleast_2d(seq).copy()
    n = S.shape[1]
    if n % 2 == 0:
        raise ValidationError(f"need an odd-length sequence for a square Hankel matrix, got {n}")
    idx = _hankel_index(n)
    h = idx.shape[0]
    ranks = np.minimum(np.broadcast_to(np.asarray(r), (S.shape[0],)), h)
    keep = np.arange(h)[None, :] < ranks[:, None]
    for _ in range(k_max):
        U, sv, Vh = np.linalg.svd(S[:, idx], full_matrices=False)
        X = (U * (sv * keep)[:, None, :]) @ Vh
        new = np.array([antidiagonal_means(x) for x in X])
        change = np.linalg.norm(new - S, axis=1)
        scale = np.linalg.norm(new, axis=1)
        S = new
        if np.all(change <= tol * scale):
            break
    return S[0] if single else S


def _even_levels(series: MeasurementSeries) -> np.ndarray:
    values = series.values
    if values.shape[1] % 2 == 0:
        warnings.warn(
            f"L={values.shape[1] - 1} is odd; dropping the last time level", RuntimeWarning, stacklevel=3
        )
        values = values[:, :-1]
    if values.shape[1] < 3:
        raise ValidationError("need L >= 2 time levels for Hankel denoising")
    return values


def denoise_series(series: MeasurementSeries, m: int, k_max: int = K_MAX,
                   rank: Optional[int] = None, tol: float = EXIT_RTOL) -> MeasurementSeries:
    """Cadzow-denoise every DFT bin of a uniformly sampled series.

    ``rank=None`` uses (m+1)/2 for bin 0 and m elsewhere; an integer applies
    the same target rank to all bins. For real input, bins j and J-j are
    averaged as conjugates so the output is real. With odd L the final level
    is dropped, so the output then has one column fewer.
    """
    J = _check_uniform(series, m)
    if k_max < 1:
        raise ValidationError(f"k_max must be >= 1, got {k_max}")
    if rank is not None and rank < 1:
        raise ValidationError(f"rank must be >= 1, got {rank}")
    values = _even_levels(series)
    spectra = dft(values)
    real = not np.iscomplexobj(values)
    bins = np.arange(J // 2 + 1) if real else np.arange(J)
    ranks = [fixed_rank(j, m) if rank is None else rank for j in bins]
    out = np.empty_like(spectra)
    out[bins] = cadzow_sequence(spectra[bins], np.array(ranks), k_max, tol)
    if real:
        # Bin J-j of a real series is the conjugate of bin j; averaging the
        # two independent runs reduces to mirroring, since Cadzow commutes
        # with conjugation.
        mirror = np.arange(J // 2 + 1, J)
        out[mirror] = np.conj(out[J - mirror])
        result = dft(out, "inverse").real
    else:
        result = dft(out, "inverse")
    return MeasurementSeries(result, series.pattern, "denoised")


def hankel_rank_ratios(series: MeasurementSeries, m: int, rank: Optional[int] = None) -> np.ndarray:
    """Per bin, ``sigma_{r+1} / sigma_1`` of the bin's Hankel matrix (0 when r fills it)."""
    J = _check_uniform(series, m)
    values = series.values
    if values.shape[1] % 2 == 0:
        values = values[:, :-1]
    spectra = dft(values)
    ratios = np.zeros(J)
    for j in range(J):
        r = fixed_rank(j, m) if rank is None else rank
        sv = np.linalg.svd(hankel_from_sequence(spectra[j]), compute_uv=False)
        if r < sv.size and sv[0] > 0:
            ratios[j] = sv[r] / sv[0]
    return ratios

