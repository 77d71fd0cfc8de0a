"""Flat run configuration shared by the command-line tools.

A config file is either ``key = value`` lines (``#`` starts a comment) or a
JSON object with the same keys. Lists are comma separated in the text form;
integer lists also accept ``start:stop[:step]`` with an exclusive stop.
Location lists (``omega``, ``omega_extra``, ``support``) are 1-based.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from .core import SamplingPattern, ValidationError

FILTERS = ("diffusion", "decreasing", "five-tap", "taps")
SIGNALS = ("benchmark", "random", "sparse")
LAYOUTS = ("rows-are-time", "rows-are-space")

# accepted spellings for keys, folded to the field names
ALIASES = {"Omega": "omega", "Omega_extra": "omega_extra", "Omega_e": "omega_extra"}

INT_LISTS = ("omega", "omega_extra", "support", "L_grid", "ranks")
FLOAT_LISTS = ("taps", "sigmas", "scales")


@dataclass
class PipelineConfig:
    d: int = 15
    m: int = 3
    omega: Optional[tuple] = None
    omega_extra: tuple = ()
    sigma: float = 0.0
    L: int = 100
    L_recover: Optional[int] = None
    trials: int = 100
    k_max: int = 25
    rank_mode: str = "fixed"
    rank: Optional[int] = None
    block: int = 1
    block_mode: str = "mean"
    seed: int = 0
    filter: str = "diffusion"
    kappa: float = 0.3
    taps: Optional[tuple] = None
    signal: str = "benchmark"
    signal_seed: int = 0
    support: tuple = (8, 9, 10)
    denoise: bool = True
    threshold: bool = False
    route: str = "noise"
    L_grid: Optional[tuple] = None
    sigmas: Optional[tuple] = None
    scales: Optional[tuple] = None
    ranks: Optional[tuple] = None
    input: Optional[str] = None
    output: Optional[str] = None
    layout: str = "rows-are-time"
    header: bool = False
    workers: Optional[int] = None

    def validate(self) -> "PipelineConfig":
        def need(cond, msg):
            if not cond:
                raise ValidationError(f"config: {msg}")

        need(self.d >= 1, f"d must be >= 1, got {self.d}")
        need(self.m >= 1, f"m must be >= 1, got {self.m}")
        need(self.sigma >= 0, f"sigma must be >= 0, got {self.sigma}")
        need(self.L >= 0, f"L must be >= 0, got {self.L}")
        need(self.L_recover is None or 0 <= self.L_recover <= self.L,
             f"L_recover must lie in 0..L={self.L}, got {self.L_recover}")
        need(self.trials >= 1, f"trials must be >= 1, got {self.trials}")
        need(self.k_max >= 1, f"k_max must be >= 1, got {self.k_max}")
        need(self.rank_mode in ("fixed", "auto"), f"rank_mode must be fixed or auto, got {self.rank_mode!r}")
        need(self.rank is None or self.rank >= 1, f"rank must be >= 1, got {self.rank}")
        need(self.block >= 1, f"block must be >= 1, got {self.block}")
        need(self.block_mode in ("mean", "sum"), f"block_mode must be mean or sum, got {self.block_mode!r}")
        need(self.filter in FILTERS, f"filter must be one of {FILTERS}, got {self.filter!r}")
        need(self.kappa > 0, f"kappa must be positive, got {self.kappa}")
        need(self.filter != "taps" or self.taps, "filter=taps needs a taps list")
        need(self.signal in SIGNALS, f"signal must be one of {SIGNALS}, got {self.signal!r}")
        need(self.route in ("noise", "direct"), f"route must be noise or direct, got {self.route!r}")
        need(self.layout in LAYOUTS, f"layout must be one of {LAYOUTS}, got {self.layout!r}")
        need(self.workers is None or self.workers >= 1, f"workers must be >= 1, got {self.workers}")
        need(not self.sigmas or min(self.sigmas) >= 0, "sigmas must be >= 0")
        need(not self.L_grid or min(self.L_grid) >= 1, "L_grid entries must be >= 1")
        need(not self.ranks or min(self.ranks) >= 0, "ranks must be >= 0 (0 means no denoising)")
        if self.omega is None:
            need(self.d % self.m == 0, f"uniform sampling needs m | d, got d={self.d}, m={self.m}")
        # constructing the patterns checks ranges and ordering
        self.pattern()
        self.recovery_pattern()
        return self

    def pattern(self) -> SamplingPattern:
        if self.omega is None:
            return SamplingPattern.uniform(self.d, self.m)
        return SamplingPattern.from_one_based(self.omega, self.d)

    def recovery_pattern(self) -> SamplingPattern:
        if not self.omega_extra:
            return self.pattern()
        extra = SamplingPattern.from_one_based(self.omega_extra, self.d)
        return self.pattern().union(extra.indices)

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_text(self) -> str:
        lines = []
        for key, value in self.to_dict().items():
            if value is None:
                continue
            if isinstance(value, tuple):
                value = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            elif isinstance(value, bool):
                value = str(value).lower()
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({k: list(v) if isinstance(v, tuple) else v for k, v in self.to_dict().items()})


FIELD_TYPES = {f.name: f for f in fields(PipelineConfig)}


def _scalar_kind(name: str) -> str:
    default = FIELD_TYPES[name].default
    if name in INT_LISTS:
        return "int-list"
    if name in FLOAT_LISTS:
        return "float-list"
    if isinstance(default, bool):
        return "bool"
    if name in ("L_recover", "rank", "workers") or isinstance(default, int):
        return "int"
    if isinstance(default, float):
        return "float"
    return "str"


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def coerce(name: str, value):
    """Convert a raw text or JSON value to the type of field ``name``."""
    kind = _scalar_kind(name)
    if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none", "null")):
        if kind.endswith("list") and FIELD_TYPES[name].default == ():
            return ()
        return None
    try:
        if kind == "int-list" and isinstance(value, str) and ":" in value:
            parts = [int(v) for v in value.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError(f"range must be start:stop[:step], got {value!r}")
            return tuple(range(*parts))
        if kind.endswith("list"):
            items = value if isinstance(value, (list, tuple)) else [v for v in str(value).split(",") if v.strip()]
            conv = int if kind == "int-list" else float
            out = []
            for v in items:
                if conv is int and isinstance(v, float) and not v.is_integer():
                    raise ValueError(f"not an integer: {v!r}")
                out.append(conv(v) if not isinstance(v, str) else conv(v.strip()))
            return tuple(out)
        if kind == "bool":
            return value if isinstance(value, bool) else _parse_bool(str(value))
        if kind == "int":
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError(f"not an integer: {value!r}")
            return int(value) if not isinstance(value, str) else int(value.strip())
        if kind == "float":
            return float(value)
        return str(value).strip()
    except ValueError as exc:
        raise ValidationError(f"config key {name!r}: {exc}") from None


def canonical_key(key: str) -> str:
    key = key.strip()
    key = ALIASES.get(key, key)
    if key not in FIELD_TYPES:
        raise ValidationError(f"unknown config key {key!r}")
    return key


def parse_mapping(raw: dict) -> dict:
    return {canonical_key(k): coerce(canonical_key(k), v) for k, v in raw.items()}


def parse_text(text: str) -> dict:
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            raw = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ValidationError("config JSON must be an object")
        return parse_mapping(raw)
    raw = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {n}: expected key = value, got {line!r}")
        key, value = line.split("=", 1)
        raw[key] = value
    return parse_mapping(raw)


def load_config(path, overrides: Optional[dict] = None) -> PipelineConfig:
    text = Path(path).read_text(encoding="utf-8")
    values = parse_text(text)
    values.update(overrides or {})
    return PipelineConfig(**values)


def from_text(text: str) -> PipelineConfig:
    return PipelineConfig(**parse_text(text))
