"""Command-line entry point.

Every subcommand reads a :class:`PipelineConfig` built from, in increasing
priority: field defaults, ``--preset NAME``, ``--config FILE`` and one flag
per config field (``--omega-extra 3,15``). Results are tidy CSV on stdout or
in ``--output``.

Exit codes: 0 success, 2 invalid input or precondition, 3 numerical failure,
4 I/O failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from importlib import resources
from pathlib import Path

import numpy as np

from .analysis import monte_carlo_mse
from .cadzow import denoise_series
from .config import PipelineConfig, coerce, parse_text
from .core import CirculantOperator, DynSampError, NumericalError, ValidationError, check_recoverability
from .experiments import CADZOW_RANKS, cadzow_sweep, default_workers, spectrum_rows, spectrum_trials
from .io import FormatError, load_matrix, save_series, write_table
from .pipeline import StageError, make_filter, make_signal, run_pipeline, sigma_sweep, synthetic_field
from .recover import recover_signal
from .simulate import measure

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

COMMANDS = ("simulate", "recover-signal", "recover-spectrum", "denoise", "mse-analyze", "pipeline")


def preset_names():
    root = resources.files("dynsamp") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_preset(name: str) -> dict:
    path = resources.files("dynsamp") / "presets" / f"{name}.cfg"
    if not path.is_file():
        raise ValidationError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return parse_text(path.read_text(encoding="utf-8"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynsamp", description="Dynamical sampling with noisy data.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "generate a noisy full-field trajectory (d rows, L+1 time levels)",
        "recover-signal": "least-squares initial state from sampled levels 0..L",
        "recover-spectrum": "filter spectrum from uniformly sampled levels",
        "denoise": "Cadzow denoising of uniform samples, or the rank/sigma sweep",
        "mse-analyze": "trace formula and Monte Carlo error profiles",
        "pipeline": "denoise, estimate the filter and recover the signal",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", help="key = value or JSON config file")
        p.add_argument("--preset", help="shipped config: " + ", ".join(preset_names()))
        group = p.add_argument_group("config fields (override --preset and --config)")
        for f in fields(PipelineConfig):
            group.add_argument("--" + f.name.replace("_", "-"), dest="field_" + f.name, metavar="VALUE")
    return parser


def resolve_config(args) -> PipelineConfig:
    values = {}
    if args.preset:
        values.update(load_preset(args.preset))
    if args.config:
        values.update(parse_text(Path(args.config).read_text(encoding="utf-8")))
    for f in fields(PipelineConfig):
        raw = getattr(args, "field_" + f.name)
        if raw is not None:
            values[f.name] = coerce(f.name, raw)
    return PipelineConfig(**values).validate()


def emit(rows, names, output) -> None:
    if output is None:
        out = sys.stdout
        out.write(",".join(names) + "\n")
        for row in rows:
            out.write(",".join("%.17g" % v if isinstance(v, float) else str(v) for v in row) + "\n")
    else:
        write_table(output, rows, names)


def _workers(config: PipelineConfig) -> int:
    return config.workers if config.workers is not None else default_workers()


def _field(config: PipelineConfig):
    """Full-field data and its reference signal (None for measured data)."""
    if config.input is not None:
        X = load_matrix(config.input, config.layout, config.header)
        if X.shape[0] != config.d:
            raise ValidationError(f"{config.input}: {X.shape[0]} locations for d={config.d}")
        return X[:, : config.L + 1], None, None
    X, filt, f = synthetic_field(config)
    return X, f, filt.spectrum


def cmd_simulate(config: PipelineConfig) -> None:
    X, _, _ = synthetic_field(config)
    if config.output is None:
        names = [f"x{i}" for i in range(1, config.d + 1)]
        rows = X.T if config.layout == "rows-are-time" else X
        emit([tuple(float(v) for v in r) for r in rows],
             names if config.layout == "rows-are-time" else [f"t{n}" for n in range(X.shape[1])], None)
    else:
        save_series(config.output, X, config.layout, config.header)


def cmd_recover_signal(config: PipelineConfig) -> None:
    A = CirculantOperator(make_filter(config))
    pattern = config.recovery_pattern()
    ok, _ = check_recoverability(A, pattern)
    if not ok:
        raise ValidationError(f"sampling set {pattern.one_based} does not determine the signal")
    X, f, _ = _field(config)
    series = measure(X, pattern, "noisy")
    g = recover_signal(A, series, threshold_sigma=config.sigma if config.threshold else None)
    ref = f if f is not None else np.full(config.d, np.nan)
    emit([(i + 1, float(g[i]), float(ref[i])) for i in range(config.d)],
         ["location", "recovered", "reference"], config.output)


def cmd_recover_spectrum(config: PipelineConfig) -> None:
    if config.sigmas and config.input is None:
        rows = spectrum_trials(config.sigmas, config.trials, config.seed, config.m, config.L, config.k_max)
        emit(rows, ["sigma", "trial", "source", "bin", "frequency", "true", "real", "imag"], config.output)
        return
    X, _, truth = _field(config)
    series = measure(X, config.pattern(), "noisy")
    if config.denoise:
        series = denoise_series(series, config.m, config.k_max, config.rank)
    if truth is None:
        truth = np.full(config.d, np.nan)
    rows = spectrum_rows(series, truth, config.m, config.rank_mode)
    emit(rows, ["bin", "frequency", "true", "real", "imag"], config.output)


def cmd_denoise(config: PipelineConfig) -> None:
    if config.sigmas and config.input is None:
        rows = cadzow_sweep(config.sigmas, config.ranks or CADZOW_RANKS, config.trials, config.seed,
                            config.m, config.L, config.k_max, _workers(config))
        emit(rows, ["sigma", "rank", "reps", "mean_relative_error", "standard_error"], config.output)
        return
    X, _, _ = _field(config)
    Z = denoise_series(measure(X, config.pattern(), "noisy"), config.m, config.k_max, config.rank)
    if config.output is None:
        emit([tuple(float(v) for v in r) for r in Z.values.T], [f"x{i}" for i in Z.pattern.one_based], None)
    else:
        save_series(config.output, Z, config.layout, config.header)


def cmd_mse_analyze(config: PipelineConfig) -> None:
    A = CirculantOperator(make_filter(config))
    pattern = config.pattern()
    ok, _ = check_recoverability(A, pattern)
    if not ok:
        raise ValidationError(f"sampling set {pattern.one_based} does not determine the signal")
    f = make_signal(config)
    L_grid = config.L_grid or tuple(range(config.d, config.d + 51, 5))
    rows = []
    for si, sigma in enumerate(config.sigmas or (config.sigma,)):
        if sigma <= 0:
            raise ValidationError("mse-analyze needs sigma > 0")
        for ci, scale in enumerate(config.scales or (1.0,)):
            est = monte_carlo_mse(A, pattern, scale * f, sigma, L_grid, config.trials,
                                  seed=config.seed + 1000 * si + ci, threshold=config.threshold,
                                  route=config.route, workers=_workers(config)).normalized()
            for p in est.points:
                rows.append((float(sigma), float(scale), p.L, p.formula, p.monte_carlo,
                             p.standard_error, p.trials, str(config.threshold).lower()))
    emit(rows, ["sigma", "scale", "L", "formula", "monte_carlo", "standard_error", "trials", "threshold"],
         config.output)


def cmd_pipeline(config: PipelineConfig) -> None:
    if config.sigmas and config.input is None:
        rows = sigma_sweep(config, config.sigmas, config.trials)
        emit(rows, ["sigma", "trials", "mean_relative_error", "std", "failures"], None
             if config.output is None else Path(config.output) / "sweep.csv")
        return
    report = run_pipeline(config)
    for key, value in sorted(report.errors.items()):
        print(f"{key} = {value:.6g}")
    for key, value in report.timings.items():
        print(f"time_{key} = {value:.4f}s")


HANDLERS = {
    "simulate": cmd_simulate,
    "recover-signal": cmd_recover_signal,
    "recover-spectrum": cmd_recover_spectrum,
    "denoise": cmd_denoise,
    "mse-analyze": cmd_mse_analyze,
    "pipeline": cmd_pipeline,
}


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, StageError):
        return exit_code(exc.cause)
    if isinstance(exc, (FormatError, OSError)):
        return EXIT_IO
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    return EXIT_INVALID


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        HANDLERS[args.command](config)
    except (DynSampError, OSError) as exc:
        print(f"dynsamp {args.command}: error: {exc}", file=sys.stderr)
        return exit_code(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
