"""Reference filters, signals and the sweeps behind the shipped presets."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
import os

import numpy as np

from .analysis import relative_error
from .cadzow import denoise_series
from .core import (
    CirculantOperator,
    NumericalError,
    RealSymmetricFilter,
    SamplingPattern,
    ValidationError,
    folded,
)
from .simulate import MeasurementSeries, NoiseModel, add_noise, evolve, measure
from .spectrum import bin_frequencies, recover_spectrum

# five-tap smoothing filter on Z_18 and its non-uniform sampling set (1-based)
FIVE_TAP = (1.0, 0.5, 0.125)
FIVE_TAP_D = 18
FIVE_TAP_OMEGA = (1, 5, 7, 10, 13, 15, 18)
FIVE_TAP_SIGMAS = (2.3714e-2, 1.3335e-3)
RANDOM_SIGNAL_NORM = 2.2914
SPARSE_SUPPORT = (8, 9, 10)

# fixed 15-point test signal used with the uniform m = 3 experiments
BENCHMARK_SIGNAL = np.array([
    0.2931, 0.3258, 0.04568, 0.3286, 0.2275, 0.0351, 0.1002, 0.1967,
    0.3444, 0.34710, 0.0567, 0.3492, 0.3443, 0.1746, 0.2879,
])
BENCHMARK_LEVELS = 100
CADZOW_SIGMAS = (1e-2, 1e-3, 1e-4, 1e-5)
CADZOW_RANKS = (0, 3, 7, 11, 15)
CADZOW_REPS = 80
EXTRA_OMEGA = (3, 15)

WORKERS_ENV = "DYNSAMP_WORKERS"


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(value)
    except ValueError:
        raise ValidationError(f"{WORKERS_ENV} must be an integer, got {value!r}") from None
    if n < 1:
        raise ValidationError(f"{WORKERS_ENV} must be >= 1, got {n}")
    return n


def five_tap_filter(d: int = FIVE_TAP_D) -> RealSymmetricFilter:
    """Taps 1, 1/2, 1/8 around the origin (symmetric)."""
    if d < 5:
        raise ValidationError(f"the five-tap filter needs d >= 5, got {d}")
    taps = np.zeros(d)
    taps[0] = FIVE_TAP[0]
    taps[[1, -1]] = FIVE_TAP[1]
    taps[[2, -2]] = FIVE_TAP[2]
    return RealSymmetricFilter(taps)


def decreasing_filter(d: int, values=None) -> RealSymmetricFilter:
    """Spectrum taking ``values`` (default 1, ..., 1/(n)) decreasingly over folded frequencies.

    With d = 15 the default spectrum is {1, 7/8, ..., 1/8}.
    """
    n = d // 2 + 1
    if values is None:
        values = 1 - np.arange(n) / n
    values = np.sort(np.asarray(values, dtype=float))[::-1]
    if values.size != n:
        raise ValidationError(f"need {n} spectrum values for d={d}, got {values.size}")
    return RealSymmetricFilter.from_spectrum(values[folded(np.arange(d), d)])


def diffusion_filter(d: int, kappa: float = 0.3) -> RealSymmetricFilter:
    """Heat-kernel style filter with spectrum ``exp(-4 kappa sin^2(pi k / d))``."""
    if kappa <= 0:
        raise ValidationError(f"kappa must be positive, got {kappa}")
    k = np.arange(d)
    return RealSymmetricFilter.from_spectrum(np.exp(-4 * kappa * np.sin(np.pi * k / d) ** 2))


def random_signal(d: int, seed: int = 0, norm: float = RANDOM_SIGNAL_NORM) -> np.ndarray:
    f = np.random.default_rng(seed).standard_normal(d)
    return f * (norm / np.linalg.norm(f))


def sparse_signal(d: int, support=SPARSE_SUPPORT) -> np.ndarray:
    """Unit values on a 1-based support."""
    f = np.zeros(d)
    idx = np.asarray(support, dtype=int) - 1
    if idx.size and (idx.min() < 0 or idx.max() >= d):
        raise ValidationError(f"support {tuple(support)} outside 1..{d}")
    f[idx] = 1.0
    return f


def benchmark_series(levels: int = BENCHMARK_LEVELS, m: int = 3):
    """Clean trajectory of the benchmark signal under the decreasing filter, sampled with step m."""
    d = BENCHMARK_SIGNAL.size
    A = CirculantOperator(decreasing_filter(d))
    X = evolve(A, BENCHMARK_SIGNAL, levels)
    return A, X, measure(X, SamplingPattern.uniform(d, m))


def _cadzow_rep(args):
    X, pattern, m, sigma, ranks, k_max, seed = args
    noisy = measure(add_noise(X, NoiseModel(sigma, seed)), pattern, "noisy")
    clean = X[list(pattern.indices)]
    out = []
    for r in ranks:
        Z = noisy if r == 0 else denoise_series(noisy, m, k_max, rank=r)
        out.append(relative_error(Z.values, clean))
    return out


def _map(fn, tasks, workers: int):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    return [fn(t) for t in tasks]


def cadzow_sweep(sigmas=CADZOW_SIGMAS, ranks=CADZOW_RANKS, reps: int = CADZOW_REPS, seed: int = 0,
                 m: int = 3, levels: int = BENCHMARK_LEVELS, k_max: int = 25, workers: int = 1):
    """Mean relative data error after denoising at each (sigma, rank); rank 0 means none.

    The clean trajectory is fixed; each repetition draws new noise on the full
    field before sampling. Returns tidy rows
    ``(sigma, rank, reps, mean, standard_error)``.
    """
    if reps < 2:
        raise ValidationError(f"need at least 2 repetitions, got {reps}")
    _, X, Y = benchmark_series(levels, m)
    rows = []
    for si, sigma in enumerate(sigmas):
        seeds = np.random.SeedSequence([seed, si]).spawn(reps)
        tasks = [(X, Y.pattern, m, sigma, tuple(ranks), k_max, s) for s in seeds]
        errs = np.array(_map(_cadzow_rep, tasks, workers))
        for c, r in enumerate(ranks):
            e = errs[:, c]
            rows.append((float(sigma), int(r), reps, float(e.mean()), float(e.std(ddof=1) / np.sqrt(reps))))
    return rows


def spectrum_rows(series: MeasurementSeries, truth, m: int, mode: str = "fixed"):
    """Per bin and folded frequency: (bin, frequency, true, real, imag) of the assigned root.

    Roots are ordered by decreasing real part against ascending frequency, the
    same rule the filter assembly uses; complex roots are kept so noisy
    estimates can still be plotted.
    """
    d = series.pattern.d
    est = recover_spectrum(series, m, mode)
    rows = []
    for j, roots in enumerate(est.per_bin_roots):
        freqs = bin_frequencies(j, d, m)
        roots = roots[np.argsort(-roots.real, kind="stable")]
        if roots.size != freqs.size:
            raise NumericalError(f"bin {j}: {roots.size} roots for {freqs.size} folded frequencies")
        for k, z in zip(freqs, roots):
            rows.append((j, int(k), float(truth[k]), float(z.real), float(z.imag)))
    return rows


def spectrum_trials(sigmas=(1e-5, 1e-4, 1e-3), trials: int = 3, seed: int = 0, m: int = 3,
                    levels: int = BENCHMARK_LEVELS, k_max: int = 25):
    """Spectrum estimates from noisy and from denoised samples, for plotting.

    Returns rows ``(sigma, trial, source, bin, frequency, true, real, imag)``.
    """
    A, X, Y = benchmark_series(levels, m)
    truth = A.eigenvalues
    rows = []
    for si, sigma in enumerate(sigmas):
        for t, s in enumerate(np.random.SeedSequence([seed, si]).spawn(trials)):
            noisy = measure(add_noise(X, NoiseModel(sigma, s)), Y.pattern, "noisy")
            denoised = denoise_series(noisy, m, k_max)
            for source, series in (("noisy", noisy), ("denoised", denoised)):
                for row in spectrum_rows(series, truth, m):
                    rows.append((float(sigma), t, source) + row)
    return rows
