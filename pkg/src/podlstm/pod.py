"""Proper orthogonal decomposition of snapshot matrices.

The truncation rank follows the cumulative-energy rule on *first powers* of
the singular values,

    E(n) = sum_{i<=n} sigma_i / sum_i sigma_i >= delta,

not the squared-singular-value ("variance") rule many POD codes use.  The two
give different mode counts for the same ``delta``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .snapshots import FieldKind, SnapshotMatrix

__all__ = [
    "PODBasis",
    "ReducedTrajectory",
    "SVDError",
    "compute_svd",
    "cumulative_energy",
    "energy_curve",
    "select_modes",
    "compute_basis",
    "project",
    "reconstruct",
]


class SVDError(RuntimeError):
    """The singular value decomposition did not converge."""


@dataclass(frozen=True, eq=False)
class PODBasis:
    """Truncated left singular vectors plus the full singular spectrum.

    ``mean`` is the subtracted row mean when the basis was built with
    centering, otherwise ``None``.
    """

    modes: np.ndarray
    singular_values: np.ndarray
    source_n_time: int = 0
    mean: np.ndarray | None = None

    def __post_init__(self):
        modes = np.asarray(self.modes, dtype=np.float64)
        sv = np.asarray(self.singular_values, dtype=np.float64)
        if modes.ndim != 2 or modes.shape[1] < 1:
            raise ValueError("basis needs at least one mode")
        if modes.shape[1] > sv.size:
            raise ValueError("more modes than singular values")
        if np.any(np.diff(sv) > 0) or np.any(sv < 0):
            raise ValueError("singular values must be non-negative and non-increasing")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "singular_values", sv)

    @property
    def n_dof(self) -> int:
        return self.modes.shape[0]

    @property
    def n_modes(self) -> int:
        return self.modes.shape[1]

    def truncate(self, n_modes: int) -> "PODBasis":
        if not 1 <= n_modes <= self.n_modes:
            raise ValueError(f"cannot truncate {self.n_modes} modes to {n_modes}")
        return PODBasis(self.modes[:, :n_modes], self.singular_values, self.source_n_time, self.mean)


@dataclass(frozen=True, eq=False)
class ReducedTrajectory:
    """Modal coefficients, one row per mode and one column per snapshot."""

    coefficients: np.ndarray
    t0: float = 0.0
    dt: float = 1.0
    field: FieldKind = FieldKind.EULERIAN_SCALAR

    def __post_init__(self):
        C = np.array(self.coefficients, dtype=np.float64)
        if C.ndim != 2:
            raise ValueError("coefficients must be a 2-D array")
        if not np.all(np.isfinite(C)):
            raise ValueError("non-finite modal coefficient")
        C.setflags(write=False)
        object.__setattr__(self, "coefficients", C)

    @property
    def n_modes(self) -> int:
        return self.coefficients.shape[0]

    @property
    def n_time(self) -> int:
        return self.coefficients.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(1, self.n_time + 1)


def compute_svd(S) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Economy SVD ``S = U diag(s) V^T`` with a deterministic sign convention.

    Returns ``(U, s, V)`` where ``V`` holds right singular vectors as columns.
    Each column of ``U`` is flipped so that its largest-magnitude entry
    (lowest index on ties) is non-negative; ``V`` is flipped with it.
    """
    A = S.values if isinstance(S, SnapshotMatrix) else np.asarray(S, dtype=np.float64)
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SVDError(f"SVD of {A.shape} matrix failed: {exc}") from exc
    pivot = np.argmax(np.abs(U), axis=0)
    signs = np.where(U[pivot, np.arange(U.shape[1])] < 0, -1.0, 1.0)
    return U * signs, s, Vt.T * signs


def energy_curve(singular_values) -> np.ndarray:
    """``E(n)`` for ``n = 1..len``; all ones for an all-zero spectrum."""
    sv = np.asarray(singular_values, dtype=np.float64)
    csum = np.cumsum(sv)
    # total taken from the cumsum itself so trailing zeros give exactly 1
    total = csum[-1]
    if total == 0:
        return np.ones_like(csum)
    return csum / total


def cumulative_energy(singular_values, n: int) -> float:
    sv = np.asarray(singular_values)
    if not 1 <= n <= sv.size:
        raise ValueError(f"n must be in [1, {sv.size}], got {n}")
    return float(energy_curve(sv)[n - 1])


def select_modes(singular_values, delta: float) -> int:
    """Smallest ``n`` with ``cumulative_energy(sv, n) >= delta``."""
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    E = energy_curve(singular_values)
    return int(np.argmax(E >= delta)) + 1


def compute_basis(
    S: SnapshotMatrix,
    delta: float | None = None,
    n_modes: int | None = None,
    center: bool = False,
) -> PODBasis:
    """POD basis of ``S`` truncated by energy ``delta`` or an explicit mode count."""
    if (delta is None) == (n_modes is None):
        raise ValueError("give exactly one of delta or n_modes")
    A = S.values
    mean = None
    if center:
        mean = A.mean(axis=1)
        A = A - mean[:, None]
    U, s, _ = compute_svd(A)
    if n_modes is None:
        n_modes = select_modes(s, delta)
    if not 1 <= n_modes <= s.size:
        raise ValueError(f"n_modes must be in [1, {s.size}], got {n_modes}")
    return PODBasis(U[:, :n_modes], s, S.n_time, mean)


def project(S: SnapshotMatrix, basis: PODBasis) -> ReducedTrajectory:
    if S.n_dof != basis.n_dof:
        raise ValueError(f"snapshot has {S.n_dof} dofs, basis has {basis.n_dof}")
    A = S.values if basis.mean is None else S.values - basis.mean[:, None]
    return ReducedTrajectory(basis.modes.T @ A, S.t0, S.dt, S.field)


def reconstruct(basis: PODBasis, C: ReducedTrajectory, name: str = "field") -> SnapshotMatrix:
    if C.n_modes != basis.n_modes:
        raise ValueError(f"trajectory has {C.n_modes} modes, basis has {basis.n_modes}")
    values = basis.modes @ C.coefficients
    if basis.mean is not None:
        values = values + basis.mean[:, None]
    return SnapshotMatrix(values, t0=C.t0, dt=C.dt, field=C.field, name=name)
