"""Numeric building blocks: DFT convention, circulant operators, sampling sets.

All indices are 0-based. The DFT is forward-unnormalized,
``zhat[k] = sum_t z[t] exp(-2j*pi*k*t/d)``, with the ``1/d`` factor on the
inverse, so a circulant operator built from filter ``a`` has eigenvalues
``dft(a)`` exactly and the folding identity for uniform subsampling carries a
``1/m`` factor.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Union

import numpy as np

RANK_RTOL = 1e-10


class DynSampError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(DynSampError, ValueError):
    """Bad shapes, parameters or preconditions."""


class NumericalError(DynSampError, ArithmeticError):
    """Rank deficiency, complex roots where real ones are required, degenerate data."""


def dft(x, direction: str = "forward") -> np.ndarray:
    """Forward (unnormalized) or inverse (1/n) DFT along the first axis."""
    x = np.asarray(x)
    if x.ndim == 0 or x.shape[0] == 0:
        raise ValidationError("dft of an empty sequence")
    if direction == "forward":
        return np.fft.fft(x, axis=0)
    if direction == "inverse":
        return np.fft.ifft(x, axis=0)
    raise ValidationError(f"unknown dft direction {direction!r}")


def folded(k, d: int):
    """Representative ``min(k, d-k)`` of the frequency pair {k, -k}."""
    k = np.mod(k, d)
    return np.minimum(k, d - k)


@dataclass(frozen=True)
class RealSymmetricFilter:
    """Real filter with ``taps[k] == taps[-k]``; its DFT is real."""

    taps: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=float).copy()
        if taps.ndim != 1 or taps.size == 0:
            raise ValidationError("filter taps must be a non-empty 1-D array")
        mirrored = taps[(-np.arange(taps.size)) % taps.size]
        scale = max(np.abs(taps).max(), 1.0)
        if not np.allclose(taps, mirrored, rtol=0, atol=1e-12 * scale):
            raise ValidationError("filter taps are not symmetric: taps[k] != taps[d-k]")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def d(self) -> int:
        return self.taps.size

    @property
    def spectrum(self) -> np.ndarray:
        """Real eigenvalues ``ahat[k]`` of the circulant operator."""
        return dft(self.taps).real

    @classmethod
    def from_spectrum(cls, ahat) -> "RealSymmetricFilter":
        """Build taps from a real spectrum satisfying ``ahat[k] == ahat[d-k]``."""
        ahat = np.asarray(ahat, dtype=float)
        d = ahat.size
        if not np.allclose(ahat, ahat[(-np.arange(d)) % d], rtol=0, atol=1e-12 * max(np.abs(ahat).max(), 1.0)):
            raise ValidationError("spectrum is not symmetric")
        taps = dft(ahat, "inverse").real
        return cls(symmetrize(taps))

    def __eq__(self, other):
        if not isinstance(other, RealSymmetricFilter):
            return NotImplemented
        return np.array_equal(self.taps, other.taps)

    def __hash__(self):
        return hash(self.taps.tobytes())


def symmetrize(taps) -> np.ndarray:
    """Average ``taps[k]`` with ``taps[-k]``; the result is exactly symmetric."""
    taps = np.asarray(taps, dtype=float)
    return 0.5 * (taps + taps[(-np.arange(taps.size)) % taps.size])


@dataclass(frozen=True)
class SamplingPattern:
    """Retained spatial indices of a length-``d`` signal.

    ``uniform_step`` is set only for the lattice ``{0, m, 2m, ...}``.
    """

    indices: tuple
    d: int
    uniform_step: Optional[int] = None
    allow_empty: bool = field(default=False, compare=False)

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if self.d < 1:
            raise ValidationError(f"dimension must be positive, got {self.d}")
        if not idx and not self.allow_empty:
            raise ValidationError("sampling pattern is empty")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValidationError(f"indices must be strictly increasing: {idx}")
        if idx and (idx[0] < 0 or idx[-1] >= self.d):
            raise ValidationError(f"indices out of range [0, {self.d - 1}]: {idx}")
        m = self.uniform_step
        if m is not None:
            if m < 1 or self.d % m:
                raise ValidationError(f"uniform step {m} does not divide d={self.d}")
            if idx != tuple(range(0, self.d, m)):
                raise ValidationError("indices do not match the declared uniform step")

    @classmethod
    def uniform(cls, d: int, m: int) -> "SamplingPattern":
        if m < 1 or d % m:
            raise ValidationError(f"uniform step {m} does not divide d={d}")
        return cls(tuple(range(0, d, m)), d, uniform_step=m)

    @classmethod
    def full(cls, d: int) -> "SamplingPattern":
        return cls.uniform(d, 1)

    @classmethod
    def from_one_based(cls, locations: Iterable[int], d: int) -> "SamplingPattern":
        """Pattern from 1-based locations, as used in configs and on the command line."""
        idx = sorted({int(i) - 1 for i in locations})
        return cls.normalized(idx, d)

    @classmethod
    def normalized(cls, indices: Iterable[int], d: int) -> "SamplingPattern":
        """Sort and deduplicate; detect a uniform lattice."""
        idx = tuple(sorted({int(i) for i in indices}))
        for m in range(1, d + 1):
            if d % m == 0 and idx == tuple(range(0, d, m)):
                return cls(idx, d, uniform_step=m)
        return cls(idx, d, allow_empty=not idx)

    def union(self, extra: Iterable[int]) -> "SamplingPattern":
        return SamplingPattern.normalized(set(self.indices) | {int(i) for i in extra}, self.d)

    @property
    def one_based(self) -> tuple:
        return tuple(i + 1 for i in self.indices)

    @property
    def size(self) -> int:
        return len(self.indices)

    def __len__(self):
        return len(self.indices)

    def matrix(self) -> np.ndarray:
        """The diagonal d x d sub-sampling matrix."""
        s = np.zeros((self.d, self.d))
        s[list(self.indices), list(self.indices)] = 1.0
        return s


@dataclass(frozen=True, eq=False)
class CirculantOperator:
    """Circular convolution with a real symmetric filter, applied by FFT."""

    filter: RealSymmetricFilter

    @property
    def d(self) -> int:
        return self.filter.d

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.filter.spectrum

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[0] != self.d:
            raise ValidationError(f"operator of size {self.d} applied to length {x.shape[0]}")
        ahat = self.eigenvalues
        shape = (-1,) + (1,) * (x.ndim - 1)
        if np.isrealobj(x):
            half = ahat[: self.d // 2 + 1].reshape(shape)
            return np.fft.irfft(half * np.fft.rfft(x, axis=0), n=self.d, axis=0)
        return np.fft.ifft(ahat.reshape(shape) * np.fft.fft(x, axis=0), axis=0)

    # symmetric filter: the operator is self-adjoint
    adjoint_apply = apply

    def matrix(self) -> np.ndarray:
        taps = self.filter.taps
        i = np.arange(self.d)
        return taps[(i[:, None] - i[None, :]) % self.d]

    def eigenbasis(self):
        """Real orthonormal eigenvectors (columns) and their frequencies.

        Returns ``(Q, freqs)`` with ``A @ Q == Q * eigenvalues[freqs]``. Columns
        come in cos/sin pairs for each frequency ``0 < k < d/2``.
        """
        return real_fourier_basis(self.d)

    def scaled(self, c: float) -> "CirculantOperator":
        return CirculantOperator(RealSymmetricFilter(c * self.filter.taps))


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """General square operator stored as a dense matrix."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValidationError(f"operator matrix must be square, got shape {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[0] != self.d:
            raise ValidationError(f"operator of size {self.d} applied to length {x.shape[0]}")
        return self.entries @ x

    def adjoint_apply(self, x) -> np.ndarray:
        return self.entries.conj().T @ np.asarray(x)

    def matrix(self) -> np.ndarray:
        return self.entries.copy()

    def scaled(self, c: float) -> "DenseOperator":
        return DenseOperator(c * self.entries)


EvolutionOperator = Union[CirculantOperator, DenseOperator]


def as_operator(a) -> EvolutionOperator:
    """Accept an operator, a filter, or a square matrix."""
    if isinstance(a, (CirculantOperator, DenseOperator)):
        return a
    if isinstance(a, RealSymmetricFilter):
        return CirculantOperator(a)
    return DenseOperator(a)


def real_fourier_basis(d: int):
    p = np.arange(d)
    cols = [np.full(d, 1.0 / np.sqrt(d))]
    freqs = [0]
    for k in range(1, (d - 1) // 2 + 1):
        cols.append(np.sqrt(2.0 / d) * np.cos(2 * np.pi * k * p / d))
        cols.append(np.sqrt(2.0 / d) * np.sin(2 * np.pi * k * p / d))
        freqs += [k, k]
    if d % 2 == 0:
        cols.append((-1.0) ** p / np.sqrt(d))
        freqs.append(d // 2)
    return np.array(cols).T, np.array(freqs)


def circular_convolve(a, f) -> np.ndarray:
    """``(a * f)[k] = sum_j a[j] f[(k - j) mod d]`` computed through the DFT."""
    if isinstance(a, RealSymmetricFilter):
        a = a.taps
    a = np.asarray(a)
    f = np.asarray(f)
    if a.shape != f.shape or a.ndim != 1:
        raise ValidationError(f"length mismatch: filter {a.shape} vs signal {f.shape}")
    out = dft(dft(a) * dft(f), "inverse")
    if np.isrealobj(a) and np.isrealobj(f):
        return out.real
    return out


def subsample(x, pattern: SamplingPattern) -> np.ndarray:
    """Rows of ``x`` at the pattern's indices (works on vectors and d x T matrices)."""
    x = np.asarray(x)
    if x.shape[0] != pattern.d:
        raise ValidationError(f"pattern for d={pattern.d} applied to length {x.shape[0]}")
    return x[list(pattern.indices)]


class Recoverability(NamedTuple):
    recoverable: bool
    min_levels: Optional[int]


def sampled_blocks(A, pattern: SamplingPattern, basis: str = "auto"):
    """Iterator over the blocks ``S A^i``, i = 0, 1, ..., and its coordinate map.

    Returns ``(blocks, Q)``: the blocks act on coordinates ``u`` with signal
    ``x = Q @ u`` (``Q`` is None for the standard basis). With ``basis="auto"``
    circulant operators use their real eigenbasis, where
    ``S A^i Q = (S Q) diag(s**i)`` is computed entrywise; repeated products
    lose the decaying eigen-directions to rounding once A^i spans many orders
    of magnitude.
    """
    A = as_operator(A)
    if pattern.d != A.d:
        raise ValidationError(f"pattern dimension {pattern.d} != operator dimension {A.d}")
    if basis not in ("auto", "spectral", "standard"):
        raise ValidationError(f"unknown basis {basis!r}")
    idx = list(pattern.indices)
    spectral = isinstance(A, CirculantOperator) and basis != "standard"
    if basis == "spectral" and not isinstance(A, CirculantOperator):
        raise ValidationError("spectral coordinates need a circulant operator")

    if spectral:
        Q, freqs = A.eigenbasis()
        s = A.eigenvalues[freqs]
        base = Q[idx]

        def blocks():
            i = 0
            while True:
                yield base * s**i
                i += 1

        return blocks(), Q

    matrix = A.matrix()

    def blocks():
        M = np.eye(A.d)[idx]
        while True:
            yield M
            M = M @ matrix

    return blocks(), None


def check_recoverability(A, pattern: SamplingPattern) -> Recoverability:
    """Whether the stack of ``S A^i``, i < d, has full column rank.

    ``min_levels`` is the smallest L such that the stack through ``A^L``
    already has rank d.
    """
    A = as_operator(A)
    if pattern.d != A.d:
        raise ValidationError(f"pattern dimension {pattern.d} != operator dimension {A.d}")
    d = A.d
    if not pattern.indices:
        return Recoverability(False, None)
    R = np.zeros((0, d))
    rows, _ = sampled_blocks(A, pattern)
    for level in range(d):
        block = next(rows)
        # row scaling leaves the rank unchanged and removes the growth of A^i
        norms = np.linalg.norm(block, axis=1, keepdims=True)
        block = np.divide(block, norms, out=np.zeros_like(block), where=norms > 0)
        R = np.linalg.qr(np.vstack([R, block]), mode="r")
        sv = np.linalg.svd(R, compute_uv=False)
        if sv[0] > 0 and np.count_nonzero(sv > RANK_RTOL * sv[0]) == d:
            return Recoverability(True, level)
    return Recoverability(False, None)
