"""Spectrum and filter recovery for symmetric convolution operators.

Uniform subsampling with step m folds the m frequencies ``j, j+J, ..., j+(m-1)J``
into DFT bin j of the subsampled signal (J = d/m). Across time levels, each
bin is a sum of exponentials in the folded eigenvalues, so a short linear
recurrence annihilates it; the roots of the recurrence's characteristic
polynomial are those eigenvalues.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    NumericalError,
    RealSymmetricFilter,
    ValidationError,
    dft,
    folded,
    symmetrize,
)
from .simulate import MeasurementSeries

SNAP_RTOL = 1e-8
AUTO_TOL = 1e-6
MAX_FIXED_STEP = 15


@dataclass(frozen=True, eq=False)
class BinSpectra:
    """Row j, column l holds the J-point DFT of time level l at bin j."""

    values: np.ndarray
    m: int

    @property
    def J(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.J * self.m


@dataclass(frozen=True, eq=False)
class AnnihilatorPolynomial:
    """Monic ``x^r + c[r-1] x^(r-1) + ... + c[0]``."""

    coefficients: np.ndarray
    bin: int = 0
    residual: float = 0.0

    @property
    def degree(self) -> int:
        return len(self.coefficients)

    def roots(self, snap_rtol: float = SNAP_RTOL) -> np.ndarray:
        return polynomial_roots(self, snap_rtol)


@dataclass(frozen=True, eq=False)
class SpectrumEstimate:
    per_bin_roots: list
    m: int
    polynomials: list = field(default_factory=list)

    @property
    def union(self) -> np.ndarray:
        return np.concatenate(self.per_bin_roots)

    @property
    def J(self) -> int:
        return len(self.per_bin_roots)


def fixed_rank(j: int, m: int) -> int:
    """Number of distinct folded eigenvalues in bin j (strictly monotone spectrum)."""
    return (m + 1) // 2 if j == 0 else m


def _check_uniform(series: MeasurementSeries, m: int) -> int:
    pattern = series.pattern
    if pattern.uniform_step != m:
        raise ValidationError(f"series is not uniformly sampled with step {m}")
    d = pattern.d
    J = d // m
    if m % 2 == 0 or J % 2 == 0:
        raise ValidationError(f"need odd m and odd J = d/m, got m={m}, J={J}")
    return J


def bin_spectra(series: MeasurementSeries, m: int) -> BinSpectra:
    _check_uniform(series, m)
    return BinSpectra(dft(series.values), m)


def _recurrence_system(seq: np.ndarray, r: int):
    n = seq.size
    rows = n - r
    windows = np.lib.stride_tricks.sliding_window_view(seq, r)[:rows]
    return windows, -seq[r:]


def _fit(seq: np.ndarray, r: int, real: bool):
    M, b = _recurrence_system(seq, r)
    if real:
        Ms = np.vstack([M.real, M.imag])
        bs = np.concatenate([b.real, b.imag])
        c = np.linalg.lstsq(Ms, bs, rcond=None)[0]
    else:
        c = np.linalg.lstsq(M, b, rcond=None)[0]
    residual = float(np.linalg.norm(M @ c - b))
    return c, residual


def find_annihilator(seq, degree: Optional[int] = None, tol: float = AUTO_TOL,
                     real: bool = False, bin: int = 0) -> AnnihilatorPolynomial:
    """Monic recurrence ``seq[k+r] + sum_l c[l] seq[k+l] = 0`` fitted by least squares.

    With ``degree`` given the order is fixed and needs ``2 * degree`` samples;
    otherwise the smallest order whose residual is at most ``tol * ||seq||``
    is returned, trying orders r with ``2r + 1 <= len(seq)``. ``real=True``
    restricts the coefficients to real numbers, which is the right model when
    the roots are known to be real.
    """
    seq = np.asarray(seq, dtype=complex)
    n = seq.size
    norm = np.linalg.norm(seq)
    if norm == 0 or not np.isfinite(norm):
        raise NumericalError(f"bin {bin}: degenerate (zero or non-finite) sequence")
    if degree is not None:
        if degree < 1:
            raise ValidationError(f"annihilator degree must be >= 1, got {degree}")
        if n < 2 * degree:
            raise ValidationError(f"sequence of length {n} too short for degree {degree} (need {2 * degree})")
        c, res = _fit(seq, degree, real)
        return AnnihilatorPolynomial(np.real_if_close(c) if real else c, bin, res)

    # a degree-r fit on 2r samples is square and always exact, so the search
    # only tests degrees with at least one redundant equation
    r_max = (n - 1) // 2
    if r_max < 1:
        raise ValidationError(f"sequence of length {n} too short for a degree search (need 3)")
    best = None
    for r in range(1, r_max + 1):
        c, res = _fit(seq, r, real)
        if best is None or res < best[1]:
            best = (r, res)
        if res <= tol * norm:
            return AnnihilatorPolynomial(c.real if real else c, bin, res)
    raise NumericalError(
        f"bin {bin}: no annihilator up to degree {r_max} meets tol {tol:g}; "
        f"best residual {best[1]:.3g} at degree {best[0]}"
    )


def companion(coefficients) -> np.ndarray:
    """Companion matrix of the monic polynomial with low-order coefficients given."""
    c = np.asarray(coefficients)
    r = c.size
    C = np.zeros((r, r), dtype=np.result_type(c, float))
    C[1:, :-1] = np.eye(r - 1)
    C[:, -1] = -c
    return C


def polynomial_roots(p: AnnihilatorPolynomial, snap_rtol: float = SNAP_RTOL) -> np.ndarray:
    """All roots via companion eigenvalues; near-real roots are snapped to real."""
    if p.degree < 1:
        raise ValidationError("polynomial degree must be >= 1")
    roots = np.linalg.eigvals(companion(p.coefficients)).astype(complex)
    near_real = np.abs(roots.imag) <= snap_rtol * (1 + np.abs(roots.real))
    roots[near_real] = roots[near_real].real
    return roots


def recover_spectrum(series: MeasurementSeries, m: int, mode: str = "fixed",
                     tol: float = AUTO_TOL, real: bool = True) -> SpectrumEstimate:
    """Per-bin annihilators on the bin spectra, and their roots.

    ``mode="fixed"`` uses degree m for bins j != 0 and (m+1)/2 for bin 0;
    ``mode="auto"`` searches for the smallest degree meeting ``tol``.
    """
    if mode not in ("fixed", "auto"):
        raise ValidationError(f"unknown rank mode {mode!r}")
    spectra = bin_spectra(series, m)
    if mode == "fixed":
        if m > MAX_FIXED_STEP:
            raise ValidationError(f"fixed-rank mode supports m <= {MAX_FIXED_STEP}, got {m}")
        if m > 5:
            warnings.warn(f"root finding for m={m} > 5 is poorly conditioned", RuntimeWarning, stacklevel=2)
        if series.levels < 2 * m:
            raise ValidationError(f"need at least {2 * m} time levels for m={m}, got {series.levels}")
    polys, roots = [], []
    for j in range(spectra.J):
        degree = fixed_rank(j, m) if mode == "fixed" else None
        p = find_annihilator(spectra.values[j], degree, tol, real, bin=j)
        polys.append(p)
        roots.append(polynomial_roots(p))
    return SpectrumEstimate(roots, m, polys)


def bin_frequencies(j: int, d: int, m: int) -> np.ndarray:
    """Distinct folded frequencies aliased into bin j, ascending."""
    J = d // m
    return np.unique(folded(j + J * np.arange(m), d))


def assemble_filter(est: SpectrumEstimate, d: int, m: int) -> RealSymmetricFilter:
    """Filter whose spectrum places each bin's roots on its folded frequencies.

    Larger roots go to smaller folded frequencies, which is exact when the
    spectrum is strictly decreasing on [0, (d-1)/2]. Bins j and J-j cover the
    same frequencies; their estimates are averaged.
    """
    J = d // m
    if J * m != d or est.J != J:
        raise ValidationError(f"estimate has {est.J} bins, expected d/m = {J}")
    total = np.zeros(d // 2 + 1)
    count = np.zeros(d // 2 + 1)
    for j, roots in enumerate(est.per_bin_roots):
        roots = np.asarray(roots)
        freqs = bin_frequencies(j, d, m)
        if j != 0 and freqs.size != m:
            raise NumericalError(f"bin {j}: folded frequencies collide outside bin 0")
        if roots.size != freqs.size:
            raise NumericalError(f"bin {j}: {roots.size} roots for {freqs.size} folded frequencies")
        bad = np.abs(roots.imag) > SNAP_RTOL * (1 + np.abs(roots.real))
        if bad.any():
            raise NumericalError(f"bin {j}: complex roots {roots[bad]} cannot be filter eigenvalues")
        values = np.sort(roots.real)[::-1]
        total[freqs] += values
        count[freqs] += 1
    if (count == 0).any():
        raise NumericalError("some frequencies received no eigenvalue")
    half = total / count
    ahat = half[folded(np.arange(d), d)]
    taps = dft(ahat, "inverse")
    if np.abs(taps.imag).max() > 1e-8 * max(np.abs(taps.real).max(), 1.0):
        raise NumericalError("assembled filter has a non-negligible imaginary part")
    return RealSymmetricFilter(symmetrize(taps.real))
