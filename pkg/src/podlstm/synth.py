"""Synthetic snapshot generator with known low-rank structure.

Each DOF history is a sum of sinusoidal tones times fixed spatial profiles,

    S[:, i] = sum_m a_m sin(2 pi f_m t_i + p_m) u_m  +  a_j sin(2 pi f_j t_i) r

where ``r`` is a unit-norm pseudo-random "jitter" pattern.  The jitter is a
single coherent high-frequency pattern, so a PSD threshold placed between its
power and the modes' power removes it exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .snapshots import FieldKind, SnapshotMatrix

__all__ = [
    "SyntheticMode",
    "SyntheticSpec",
    "make_profile",
    "generate_eulerian",
    "generate_lagrangian",
    "reference_spec",
]

# rng stream ids; random mode profiles use _PROFILE_STREAM + mode index
_JITTER_STREAM = 0
_PROFILE_STREAM = 1


@dataclass(frozen=True)
class SyntheticMode:
    spatial_profile: np.ndarray
    amplitude: float
    frequency: float
    phase: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.spatial_profile, dtype=np.float64)
        if p.ndim != 1:
            raise ValueError("spatial profile must be a vector")
        if abs(np.linalg.norm(p) - 1.0) > 1e-12:
            raise ValueError("spatial profile must have unit norm")
        if self.frequency < 0:
            raise ValueError("mode frequency must be >= 0")
        object.__setattr__(self, "spatial_profile", p)


@dataclass(frozen=True)
class SyntheticSpec:
    n_dof: int
    modes: tuple[SyntheticMode, ...] = ()
    jitter_amplitude: float = 0.0
    jitter_frequency: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if self.n_dof < 1:
            raise ValueError("n_dof must be >= 1")
        if self.jitter_amplitude < 0:
            raise ValueError("jitter amplitude must be >= 0")
        freqs = [m.frequency for m in self.modes]
        if len(set(freqs)) != len(freqs):
            raise ValueError(f"mode frequencies must be distinct, got {freqs}")
        for m in self.modes:
            if m.spatial_profile.shape != (self.n_dof,):
                raise ValueError("mode profile length must equal n_dof")

    def jitter_vector(self) -> np.ndarray:
        return rng.unit_vector(self.seed, _JITTER_STREAM, self.n_dof)

    def check_nyquist(self, dt: float) -> None:
        nyquist = 1.0 / (2.0 * dt)
        for m in self.modes:
            if m.frequency >= nyquist:
                raise ValueError(f"mode frequency {m.frequency} Hz not below Nyquist {nyquist} Hz")
        if self.jitter_frequency >= nyquist:
            raise ValueError(
                f"jitter frequency {self.jitter_frequency} Hz not below Nyquist {nyquist} Hz"
            )


def make_profile(kind: str, n_dof: int, seed: int = 0, index: int = 0) -> np.ndarray:
    """Unit-norm spatial profile.

    ``kind`` is ``"basis:k"`` (unit vector e_k), ``"sinusoid:k"``
    (sin(pi k (j+1) / (n_dof+1)), the k-th discrete sine) or ``"random"``
    (drawn from stream ``1 + index`` of ``seed``).
    """
    name, _, arg = kind.partition(":")
    if name == "basis":
        k = int(arg)
        if not 0 <= k < n_dof:
            raise ValueError(f"basis index {k} out of range for {n_dof} dofs")
        p = np.zeros(n_dof)
        p[k] = 1.0
        return p
    if name == "sinusoid":
        k = int(arg)
        if k < 1:
            raise ValueError("sinusoid profile index must be >= 1")
        p = np.sin(np.pi * k * np.arange(1, n_dof + 1) / (n_dof + 1))
        norm = np.linalg.norm(p)
        if norm < 1e-12:
            raise ValueError(f"sinusoid:{k} vanishes on {n_dof} dofs")
        return p / norm
    if name == "random" and not arg:
        return rng.unit_vector(seed, _PROFILE_STREAM + index, n_dof)
    raise ValueError(f"unknown profile kind {kind!r}")


def _values(spec: SyntheticSpec, times: np.ndarray) -> np.ndarray:
    S = np.zeros((spec.n_dof, times.size))
    for m in spec.modes:
        S += np.outer(m.spatial_profile, m.amplitude * np.sin(2 * np.pi * m.frequency * times + m.phase))
    if spec.jitter_amplitude > 0:
        S += np.outer(
            spec.jitter_vector(),
            spec.jitter_amplitude * np.sin(2 * np.pi * spec.jitter_frequency * times),
        )
    return S


def generate_eulerian(
    spec: SyntheticSpec,
    n_time: int,
    dt: float,
    t0: float = 0.0,
    name: str = "eps",
    field: FieldKind = FieldKind.EULERIAN_SCALAR,
) -> SnapshotMatrix:
    spec.check_nyquist(dt)
    times = t0 + dt * np.arange(1, n_time + 1)
    return SnapshotMatrix(_values(spec, times), t0=t0, dt=dt, field=field, name=name)


def generate_lagrangian(
    spec_x: SyntheticSpec,
    spec_y: SyntheticSpec,
    spec_z: SyntheticSpec,
    n_time: int,
    dt: float,
    t0: float = 0.0,
) -> tuple[SnapshotMatrix, SnapshotMatrix, SnapshotMatrix]:
    """Particle position components; row ``l`` of each matrix is particle ``l``."""
    if not spec_x.n_dof == spec_y.n_dof == spec_z.n_dof:
        raise ValueError("x/y/z specs must share the particle count")
    kinds = (FieldKind.LAGRANGIAN_X, FieldKind.LAGRANGIAN_Y, FieldKind.LAGRANGIAN_Z)
    return tuple(
        generate_eulerian(spec, n_time, dt, t0, name=label, field=kind)
        for spec, kind, label in zip((spec_x, spec_y, spec_z), kinds, ("x", "y", "z"))
    )


# integer numbers of cycles over a 4.5 s window at 100 Hz sampling
REFERENCE_FREQUENCIES = (0.0, 2 / 4.5, 4 / 4.5, 6 / 4.5, 10 / 4.5)
REFERENCE_AMPLITUDES = (1.0, 0.5, 0.3, 0.12, 0.1)
REFERENCE_PHASES = (np.pi / 2, 0.0, 0.5, 1.0, 1.5)


def reference_spec(n_dof: int = 2700, jitter_amplitude: float = 0.05, seed: int = 7) -> SyntheticSpec:
    """Five slow modes on smooth sine profiles plus 30 Hz jitter.

    The 0 Hz mode (phase pi/2) is a steady mean field.  Every other tone
    completes a whole number of cycles over 450 samples at dt = 0.01 s, so
    PSD filtering of that window removes the jitter without leakage.  A PSD
    threshold of 4e-4 sits between the jitter and the bulk of the modes.
    """
    modes = [
        SyntheticMode(make_profile(f"sinusoid:{k + 1}", n_dof), a, f, p)
        for k, (a, f, p) in enumerate(zip(REFERENCE_AMPLITUDES, REFERENCE_FREQUENCIES, REFERENCE_PHASES))
    ]
    return SyntheticSpec(n_dof, modes, jitter_amplitude=jitter_amplitude, jitter_frequency=30.0, seed=seed)
