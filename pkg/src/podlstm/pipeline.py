"""Offline/online POD-LSTM workflow and relative-error reporting."""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .fft import FilterConfig, filter_snapshots
from .lstm import LSTMModel, TrainingConfig, predict_rollout, train
from .pod import PODBasis, ReducedTrajectory, compute_basis, project, reconstruct
from .snapshots import SnapshotMatrix, SplitSpec, format_float, split_train_validation

__all__ = [
    "PipelineConfig",
    "RomArtifacts",
    "ErrorReport",
    "offline",
    "online_predict",
    "timed_online_predict",
    "identify",
    "relative_l2_error",
    "error_series",
    "speedup",
]


@dataclass(frozen=True)
class PipelineConfig:
    split: SplitSpec
    training: TrainingConfig = field(default_factory=TrainingConfig)
    psd_threshold: float = 0.0
    keep_dc: bool = True
    delta: float | None = None
    n_modes: int | None = None
    center: bool = False

    def __post_init__(self):
        if (self.delta is None) == (self.n_modes is None):
            raise ValueError("set exactly one of delta or n_modes")
        if self.delta is not None and not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if self.n_modes is not None and self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")

    @property
    def filter(self) -> FilterConfig:
        return FilterConfig(self.psd_threshold, self.keep_dc)


@dataclass(frozen=True, eq=False)
class RomArtifacts:
    basis: PODBasis
    model: LSTMModel
    filtered_training: SnapshotMatrix
    coefficients: ReducedTrajectory
    config: PipelineConfig
    loss_history: np.ndarray
    offline_seconds: float = 0.0

    def __post_init__(self):
        if self.model.input_size != self.basis.n_modes:
            raise ValueError("model input size differs from basis mode count")


def offline(S: SnapshotMatrix, cfg: PipelineConfig) -> RomArtifacts:
    """Filter the training window, build the POD basis on it, project, train."""
    start = time.perf_counter()
    cfg.split.check(S.n_time, cfg.training.sequence_length)
    train_part, _ = split_train_validation(S, cfg.split)
    filtered = filter_snapshots(train_part, cfg.filter)
    basis = compute_basis(filtered, delta=cfg.delta, n_modes=cfg.n_modes, center=cfg.center)
    C = project(filtered, basis)
    model, history = train(C, cfg.training)
    return RomArtifacts(basis, model, filtered, C, cfg, history, time.perf_counter() - start)


def online_predict(artifacts: RomArtifacts, n_steps: int) -> SnapshotMatrix:
    """Roll the LSTM past the training horizon and lift back to full order.

    ``artifacts.online_seconds`` is not stored (artifacts are immutable); use
    :func:`timed_online_predict` for wall-clock accounting.
    """
    return timed_online_predict(artifacts, n_steps)[0]


def timed_online_predict(artifacts: RomArtifacts, n_steps: int) -> tuple[SnapshotMatrix, float]:
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    start = time.perf_counter()
    C = artifacts.coefficients
    seed = C.coefficients[:, -artifacts.model.sequence_length :].T
    future = predict_rollout(artifacts.model, seed, n_steps)
    t0 = C.t0 + C.n_time * C.dt
    out = reconstruct(
        artifacts.basis,
        ReducedTrajectory(future.T, t0, C.dt, C.field),
        name=artifacts.filtered_training.name,
    )
    return out, time.perf_counter() - start


def identify(artifacts: RomArtifacts) -> SnapshotMatrix:
    """Training-window fields rebuilt from projected (not forecast) coefficients."""
    return reconstruct(artifacts.basis, artifacts.coefficients, name=artifacts.filtered_training.name)


def relative_l2_error(fom_column, rom_column, weights=None) -> float:
    """``100 * ||fom - rom|| / ||fom||`` with optional per-DOF weights."""
    fom = np.asarray(fom_column, dtype=np.float64)
    rom = np.asarray(rom_column, dtype=np.float64)
    if fom.shape != rom.shape:
        raise ValueError(f"length mismatch {fom.shape} vs {rom.shape}")
    w = 1.0 if weights is None else np.asarray(weights, dtype=np.float64)
    ref = np.sqrt(np.sum(w * fom**2))
    if ref == 0:
        raise ZeroDivisionError("reference field has zero norm")
    return float(100.0 * np.sqrt(np.sum(w * (fom - rom) ** 2)) / ref)


@dataclass(frozen=True, eq=False)
class ErrorReport:
    times: np.ndarray
    relative_errors: np.ndarray
    split_index: int
    offline_seconds: float | None = None
    online_seconds: float | None = None

    @property
    def windows(self) -> list[str]:
        return ["train" if k < self.split_index else "validation" for k in range(self.times.size)]

    def _stat(self, fn, part):
        e = self.relative_errors[: self.split_index] if part == "train" else self.relative_errors[self.split_index :]
        return float(fn(e)) if e.size else float("nan")

    @property
    def train_mean(self) -> float:
        return self._stat(np.mean, "train")

    @property
    def train_max(self) -> float:
        return self._stat(np.max, "train")

    @property
    def validation_mean(self) -> float:
        return self._stat(np.mean, "validation")

    @property
    def validation_max(self) -> float:
        return self._stat(np.max, "validation")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "relative_error_percent", "window"])
            for t, e, win in zip(self.times, self.relative_errors, self.windows):
                w.writerow([format_float(t), format_float(e), win])

    @classmethod
    def from_csv(cls, path) -> "ErrorReport":
        times, errs, wins = [], [], []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            if next(reader) != ["t", "relative_error_percent", "window"]:
                raise ValueError(f"{path}: unexpected header")
            for row in reader:
                times.append(float(row[0]))
                errs.append(float(row[1]))
                wins.append(row[2])
        split = sum(1 for w in wins if w == "train")
        if wins != ["train"] * split + ["validation"] * (len(wins) - split):
            raise ValueError(f"{path}: train rows must precede validation rows")
        return cls(np.array(times), np.array(errs), split)


def error_series(
    fom: SnapshotMatrix,
    rom: SnapshotMatrix,
    split_index: int | None = None,
    weights=None,
) -> ErrorReport:
    """Per-column relative L2 error; columns before ``split_index`` are training."""
    if fom.shape != rom.shape:
        raise ValueError(f"shape mismatch {fom.shape} vs {rom.shape}")
    same_dt = np.isclose(fom.dt, rom.dt, rtol=1e-9, atol=0)
    if not (same_dt and np.allclose(fom.times, rom.times, rtol=0, atol=1e-9 * fom.dt)):
        raise ValueError("FOM and ROM time grids differ")
    errs = np.array(
        [relative_l2_error(fom.values[:, k], rom.values[:, k], weights) for k in range(fom.n_time)]
    )
    split = fom.n_time if split_index is None else split_index
    if not 0 <= split <= fom.n_time:
        raise ValueError("split index out of range")
    return ErrorReport(fom.times, errs, split)


def speedup(fom_seconds: float, online_seconds: float) -> float:
    if not online_seconds > 0:
        raise ValueError("online time must be positive")
    return fom_seconds / online_seconds
