"""SplitMix64 counter-based generator.

Draw ``i`` (0-based) of stream ``(seed, stream)`` is ``mix64(key + (i + 1) * GAMMA)``
with ``key = mix64(seed + stream * GAMMA)`` (all arithmetic mod 2**64).  The
sequence is fully determined by these two lines, so fixtures can be
reproduced outside numpy.  Uniform doubles take the top 53 bits.
"""
from __future__ import annotations

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def mix64(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def raw(seed: int, stream: int, n: int) -> np.ndarray:
    key = int(mix64((seed + stream * GAMMA) & _MASK))
    counters = (np.arange(1, n + 1, dtype=np.uint64) * np.uint64(GAMMA))
    with np.errstate(over="ignore"):
        counters = counters + np.uint64(key)
    return mix64(counters)


def uniform(seed: int, stream: int, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
    """``n`` doubles in ``[low, high)``."""
    u = (raw(seed, stream, n) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
    return low + (high - low) * u


def unit_vector(seed: int, stream: int, n: int) -> np.ndarray:
    """Uniform entries in ``[-1, 1)``, normalised to unit Euclidean norm."""
    v = uniform(seed, stream, n, -1.0, 1.0)
    norm = np.linalg.norm(v)
    if norm == 0.0:  # pragma: no cover - probability 2**-53n
        v[0], norm = 1.0, 1.0
    return v / norm
