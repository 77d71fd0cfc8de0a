"""Numeric CSV tables: sensor logs in, plot data out.

Comma separated, '.' decimal point, at most one header row, no quoting.
Values are written with 17 significant digits so a round trip is exact.
"""
from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import DynSampError, SamplingPattern, ValidationError
from .simulate import MeasurementSeries

LAYOUTS = ("rows-are-time", "rows-are-space")


class FormatError(DynSampError, ValueError):
    """Malformed table; the message names the offending row and column."""


def _format(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def read_table(path, header: bool = False):
    """Return ``(names or None, values)`` for a rectangular numeric CSV."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [(n, line) for n, line in enumerate(text.splitlines(), 1) if line.strip()]
    names = None
    if header:
        if not lines:
            raise FormatError(f"{path}: empty file")
        names = [c.strip() for c in lines[0][1].split(",")]
        lines = lines[1:]
    if not lines:
        raise FormatError(f"{path}: no data rows")
    width = None
    rows = []
    for n, line in lines:
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise FormatError(f"{path}: row {n} has {len(cells)} fields, expected {width}")
        row = []
        for c, cell in enumerate(cells, 1):
            try:
                row.append(float(cell))
            except ValueError:
                raise FormatError(f"{path}: row {n}, column {c}: not a number: {cell.strip()!r}") from None
        rows.append(row)
    if names is not None and len(names) != width:
        raise FormatError(f"{path}: header has {len(names)} names for {width} columns")
    return names, np.array(rows)


def write_table(path, rows, names: Optional[Sequence[str]] = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        if names is not None:
            fh.write(",".join(names) + "\n")
        for row in rows:
            fh.write(",".join(_format(v) for v in row) + "\n")


def load_matrix(path, layout: str = "rows-are-time", header: bool = False) -> np.ndarray:
    """Load a space x time matrix, whatever the on-disk orientation."""
    if layout not in LAYOUTS:
        raise ValidationError(f"unknown layout {layout!r}")
    _, values = read_table(path, header)
    return values.T.copy() if layout == "rows-are-time" else values


def load_series(path, layout: str = "rows-are-time", header: bool = False,
                pattern: Optional[SamplingPattern] = None, kind: str = "clean") -> MeasurementSeries:
    """Series with rows as locations and columns as time levels.

    Without ``pattern`` every row is a location of a fully sampled field.
    """
    X = load_matrix(path, layout, header)
    if pattern is None:
        pattern = SamplingPattern.full(X.shape[0])
    return MeasurementSeries(X, pattern, kind)


def save_series(path, series, layout: str = "rows-are-time", header: bool = False) -> None:
    if layout not in LAYOUTS:
        raise ValidationError(f"unknown layout {layout!r}")
    X = series.values if isinstance(series, MeasurementSeries) else np.asarray(series)
    if X.ndim == 1:
        X = X[:, None]
    if layout == "rows-are-time":
        names = [f"x{i}" for i in range(1, X.shape[0] + 1)] if header else None
        write_table(path, X.T, names)
    else:
        names = [f"t{n}" for n in range(X.shape[1])] if header else None
        write_table(path, X, names)
