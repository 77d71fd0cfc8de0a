"""End-to-end run: smooth, sample, denoise, estimate the filter, recover the signal."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .analysis import relative_error
from .cadzow import denoise_series
from .config import PipelineConfig
from .core import (
    CirculantOperator,
    DynSampError,
    NumericalError,
    RealSymmetricFilter,
    ValidationError,
    check_recoverability,
    symmetrize,
)
from .experiments import (
    BENCHMARK_SIGNAL,
    decreasing_filter,
    diffusion_filter,
    five_tap_filter,
    random_signal,
    sparse_signal,
)
from .io import load_matrix, write_table
from .recover import SignalRecovery
from .simulate import NoiseModel, add_noise, block_aggregate, evolve, measure
from .spectrum import assemble_filter, recover_spectrum


class StageError(DynSampError):
    """A pipeline stage failed; wraps the original error with the stage name."""

    def __init__(self, stage: str, cause: Exception, config: PipelineConfig):
        self.stage = stage
        self.cause = cause
        self.config = config
        super().__init__(f"stage {stage!r} failed: {cause}\nconfig:\n{config.to_text()}")


@dataclass(eq=False)
class PipelineReport:
    filter: RealSymmetricFilter
    spectrum: np.ndarray
    signal: np.ndarray
    reference_signal: Optional[np.ndarray]
    true_spectrum: Optional[np.ndarray]
    errors: dict
    timings: dict = field(default_factory=dict)

    def signal_rows(self):
        ref = self.reference_signal
        return [(i + 1, float(s), float(ref[i]) if ref is not None else float("nan"))
                for i, s in enumerate(self.signal)]

    def spectrum_rows(self):
        true = self.true_spectrum
        return [(k, float(v), float(true[k]) if true is not None else float("nan"))
                for k, v in enumerate(self.spectrum)]

    def write(self, directory) -> None:
        """Plot data as CSV; timings are left out so reruns are byte-identical."""
        out = Path(directory)
        write_table(out / "signal.csv", self.signal_rows(), ["location", "recovered", "reference"])
        write_table(out / "spectrum.csv", self.spectrum_rows(), ["frequency", "estimated", "reference"])
        write_table(out / "errors.csv", sorted(self.errors.items()), ["metric", "value"])


def make_filter(config: PipelineConfig) -> RealSymmetricFilter:
    if config.filter == "diffusion":
        return diffusion_filter(config.d, config.kappa)
    if config.filter == "decreasing":
        return decreasing_filter(config.d)
    if config.filter == "five-tap":
        return five_tap_filter(config.d)
    taps = np.asarray(config.taps, dtype=float)
    if taps.size != config.d:
        raise ValidationError(f"taps has {taps.size} entries for d={config.d}")
    return RealSymmetricFilter(symmetrize(taps))


def make_signal(config: PipelineConfig) -> np.ndarray:
    if config.signal == "benchmark":
        if config.d != BENCHMARK_SIGNAL.size:
            raise ValidationError(f"the benchmark signal has length {BENCHMARK_SIGNAL.size}, d={config.d}")
        return BENCHMARK_SIGNAL.copy()
    if config.signal == "random":
        return random_signal(config.d, config.signal_seed)
    return sparse_signal(config.d, config.support)


def synthetic_field(config: PipelineConfig, sigma: Optional[float] = None, seed=None):
    """Noisy full-field trajectory, d x (L+1), with its generating filter and signal."""
    filt = make_filter(config)
    f = make_signal(config)
    X = evolve(CirculantOperator(filt), f, config.L)
    noise = NoiseModel(config.sigma if sigma is None else sigma, config.seed if seed is None else seed)
    return add_noise(X, noise), filt, f


def precheck(config: PipelineConfig) -> None:
    """Validate the config and the sampling geometry before any computation."""
    config.validate()
    if config.omega is not None:
        raise ValidationError("the pipeline estimates the filter from uniform samples; leave omega unset")
    m, d = config.m, config.d
    if m % 2 == 0 or (d // m) % 2 == 0:
        raise ValidationError(f"the pipeline needs odd m and odd d/m, got m={m}, d/m={d // m}")
    # any strictly decreasing spectrum has the same recoverability for a given pattern
    reference = CirculantOperator(decreasing_filter(d))
    ok, _ = check_recoverability(reference, config.recovery_pattern())
    if not ok:
        raise ValidationError(
            f"sampling set {config.recovery_pattern().one_based} does not determine the signal; "
            "add locations via omega_extra"
        )
    levels = (config.L + 1) // config.block
    if levels < 2 * m:
        raise ValidationError(f"need at least {2 * m} smoothed time levels, got {levels}")


def run_pipeline(config: PipelineConfig, data: Optional[np.ndarray] = None) -> PipelineReport:
    """Run every stage on ``data`` (d x T) or, when absent, on synthetic data from the config.

    For synthetic data the generating signal and spectrum are the references.
    For measured data the reference signal is the first smoothed time level of
    the full field.
    """
    precheck(config)
    timings = {}
    truth_signal = truth_spectrum = None

    def stage(name, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        except DynSampError as exc:
            raise StageError(name, exc, config) from exc
        finally:
            timings[name] = time.perf_counter() - t0

    if data is None:
        if config.input is not None:
            data = stage("load", load_matrix, config.input, config.layout, config.header)
        else:
            data, filt, truth_signal = stage("simulate", synthetic_field, config)
            truth_spectrum = filt.spectrum
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] != config.d:
        raise StageError("load", ValidationError(f"data of shape {data.shape} for d={config.d}"), config)
    data = data[:, : config.L + 1]

    if config.block > 1:
        data = stage("smooth", block_aggregate, data, config.block, config.block_mode)
    if truth_signal is None:
        truth_signal = data[:, 0].copy()

    pattern = config.pattern()
    samples = stage("subsample", measure, data, pattern, "noisy")
    if config.denoise:
        samples = stage("denoise", denoise_series, samples, config.m, config.k_max, config.rank)
    est = stage("spectrum", recover_spectrum, samples, config.m, config.rank_mode)
    filt = stage("filter", assemble_filter, est, config.d, config.m)

    full = config.recovery_pattern()
    levels = samples.levels if config.L_recover is None else min(config.L_recover + 1, samples.levels)
    rows = data[list(full.indices), :levels].copy()
    position = {q: i for i, q in enumerate(full.indices)}
    for i, q in enumerate(pattern.indices):
        rows[position[q]] = samples.values[i, :levels]

    def solve():
        rec = SignalRecovery(CirculantOperator(filt), full)
        for n in range(levels):
            rec.absorb(rows[:, n])
        return rec.estimate()

    signal = stage("recover", solve)
    errors = {"signal_relative_error": relative_error(signal, truth_signal)}
    if truth_spectrum is not None:
        errors["spectrum_max_error"] = float(np.abs(filt.spectrum - truth_spectrum).max())
    report = PipelineReport(filt, filt.spectrum, signal, truth_signal, truth_spectrum, errors, timings)
    if config.output is not None:
        report.write(config.output)
    return report


def sigma_sweep(config: PipelineConfig, sigmas, trials: int = 1):
    """Mean and standard deviation of the signal error per sigma, over seeded trials.

    Returns rows ``(sigma, trials, mean, std, failures)``; a trial whose noisy
    spectrum has complex roots counts as a failure and is left out of the mean.
    """
    rows = []
    for si, sigma in enumerate(sigmas):
        errs, failures = [], 0
        for t in range(trials):
            cfg = config.replace(sigma=float(sigma), seed=config.seed + 1000 * si + t, output=None)
            try:
                errs.append(run_pipeline(cfg).errors["signal_relative_error"])
            except StageError as exc:
                if not isinstance(exc.cause, NumericalError):
                    raise
                failures += 1
        e = np.array(errs)
        mean = float(e.mean()) if e.size else float("nan")
        std = float(e.std(ddof=1)) if e.size > 1 else 0.0
        rows.append((float(sigma), trials, mean, std, failures))
    return rows
