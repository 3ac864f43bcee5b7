"""Discrete Fourier analysis and PSD-threshold filtering of snapshot rows.

The transform is a recursive mixed-radix decimation-in-time FFT working on
the last axis of an array, so every DOF row of a snapshot matrix is handled
in one vectorised pass.  Lengths whose smallest prime factor exceeds
``_MAX_RADIX`` go through Bluestein's chirp-z algorithm on a power-of-two
grid, which keeps every length at O(N log N).

Conventions::

    X[k] = sum_n x[n] exp(-2j pi k n / N)
    PSD[k] = |X[k]|**2 / N
    freq[k] = k / (N dt)
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .snapshots import SnapshotMatrix

__all__ = [
    "Spectrum",
    "PsdVector",
    "FilterConfig",
    "fft",
    "ifft",
    "dft_forward",
    "dft_inverse",
    "psd",
    "row_psd",
    "filter_snapshots",
    "SymmetryError",
]

_MAX_RADIX = 31
_SYMMETRY_TOL = 1e-9


class SymmetryError(ValueError):
    """Spectrum is not the transform of a real series."""


def _smallest_factor(n: int) -> int:
    if n % 2 == 0:
        return 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return f
        f += 2
    return n


@lru_cache(maxsize=None)
def _twiddles(n: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    m = n // p
    rk = np.outer(np.arange(p), np.arange(m)) % n
    twiddle = np.exp(-2j * np.pi * rk / n)
    small = np.exp(-2j * np.pi * (np.outer(np.arange(p), np.arange(p)) % p) / p)
    return twiddle, small


@lru_cache(maxsize=None)
def _chirp(n: int) -> tuple[np.ndarray, np.ndarray, int]:
    k = np.arange(n)
    w = np.exp(-1j * np.pi * ((k * k) % (2 * n)) / n)
    m = 1 << (2 * n - 2).bit_length()
    b = np.zeros(m, dtype=complex)
    b[:n] = np.conj(w)
    b[m - n + 1 :] = np.conj(w[1:][::-1])
    return w, _fft(b), m


def _bluestein(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    w, B, m = _chirp(n)
    a = np.zeros(x.shape[:-1] + (m,), dtype=complex)
    a[..., :n] = x * w
    conv = _ifft_unscaled(_fft(a) * B) / m
    return w * conv[..., :n]


def _fft(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    if n == 1:
        return x.copy()
    p = _smallest_factor(n)
    if p > _MAX_RADIX:
        return _bluestein(x)
    m = n // p
    # p interleaved subsequences x[r::p], each transformed recursively
    sub = _fft(x.reshape(x.shape[:-1] + (m, p)).swapaxes(-1, -2))
    twiddle, small = _twiddles(n, p)
    out = np.einsum("qr,...rk->...qk", small, sub * twiddle)
    return out.reshape(x.shape[:-1] + (n,))


def _ifft_unscaled(X: np.ndarray) -> np.ndarray:
    return np.conj(_fft(np.conj(X)))


def fft(x) -> np.ndarray:
    """Forward DFT along the last axis (no normalisation)."""
    x = np.asarray(x, dtype=complex)
    if x.shape[-1] == 0:
        raise ValueError("cannot transform an empty series")
    return _fft(x)


def ifft(X) -> np.ndarray:
    """Inverse DFT along the last axis, including the 1/N factor."""
    X = np.asarray(X, dtype=complex)
    return _ifft_unscaled(X) / X.shape[-1]


def _mirror(X: np.ndarray) -> np.ndarray:
    """``X[..., (-k) % N]``."""
    return np.roll(X[..., ::-1], 1, axis=-1)


def _check_symmetric(X: np.ndarray, tol: float = _SYMMETRY_TOL) -> None:
    scale = np.max(np.abs(X), axis=-1, keepdims=True)
    dev = np.max(np.abs(X - np.conj(_mirror(X))), axis=-1, keepdims=True)
    bad = dev > tol * np.where(scale > 0, scale, 1.0)
    if np.any(bad):
        raise SymmetryError(
            f"spectrum not conjugate-symmetric: deviation {float(np.max(dev)):.3e}"
        )


def _real_part(z: np.ndarray, tol: float = _SYMMETRY_TOL) -> np.ndarray:
    scale = np.max(np.abs(z.real), axis=-1, keepdims=True)
    residue = np.max(np.abs(z.imag), axis=-1, keepdims=True)
    if np.any(residue > tol * np.where(scale > 0, scale, 1.0)):
        raise SymmetryError(f"inverse transform has imaginary residue {float(np.max(residue)):.3e}")
    return np.ascontiguousarray(z.real)


@dataclass(frozen=True, eq=False)
class Spectrum:
    coefficients: np.ndarray
    dt: float = 1.0

    @property
    def n(self) -> int:
        return self.coefficients.shape[-1]

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.n) / (self.n * self.dt)


@dataclass(frozen=True, eq=False)
class PsdVector:
    values: np.ndarray
    frequencies: np.ndarray


@dataclass(frozen=True)
class FilterConfig:
    psd_threshold: float = 0.0
    keep_dc: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.psd_threshold) and self.psd_threshold >= 0):
            raise ValueError(f"PSD threshold must be finite and >= 0, got {self.psd_threshold}")


def dft_forward(series, dt: float = 1.0) -> Spectrum:
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("series must be a vector of length >= 2")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"non-finite entry at index {int(np.argmax(~np.isfinite(x)))}")
    return Spectrum(fft(x), dt)


def dft_inverse(spectrum: Spectrum) -> np.ndarray:
    X = np.asarray(spectrum.coefficients, dtype=complex)
    _check_symmetric(X)
    return _real_part(ifft(X))


def psd(spectrum: Spectrum, n_time: int | None = None) -> PsdVector:
    X = spectrum.coefficients
    if n_time is not None and n_time != X.shape[-1]:
        raise ValueError(f"n_time={n_time} does not match spectrum length {X.shape[-1]}")
    return PsdVector(np.abs(X) ** 2 / X.shape[-1], spectrum.frequencies)


def row_psd(S: SnapshotMatrix) -> PsdVector:
    """PSD of every DOF row at once; ``values`` has the shape of ``S``."""
    return psd(Spectrum(fft(S.values), S.dt))


def filter_snapshots(S: SnapshotMatrix, cfg: FilterConfig) -> SnapshotMatrix:
    """Zero every conjugate bin pair whose PSD is strictly below the threshold.

    Rows are treated independently.  Bin 0 survives when ``cfg.keep_dc``.
    """
    if S.n_time < 2:
        raise ValueError("filtering needs at least two time columns")
    X = fft(S.values)
    power = np.abs(X) ** 2 / S.n_time
    # decide on the pair so both halves go together and the output stays real
    cut = np.maximum(power, _mirror(power)) < cfg.psd_threshold
    if cfg.keep_dc:
        cut[:, 0] = False
    X[cut] = 0.0
    return S.with_values(_real_part(ifft(X)))
