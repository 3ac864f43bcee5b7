"""Flat ``key = value`` configuration files.

Lines starting with ``#`` are comments.  ``mode`` may repeat; every other key
appears at most once.  Example::

    # synthetic data
    n_dof = 2700
    n_time = 500
    dt = 0.01
    mode = 1.0, 0.0, 1.5707963267948966, sinusoid:1
    mode = 0.5, 0.4444444444444444, 0, sinusoid:2
    jitter_amplitude = 0.05
    jitter_frequency = 30
    # offline / online
    psd_threshold = 4e-4
    delta = 0.99
    n_train = 450
    n_validation = 50
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .lstm import TrainingConfig
from .pipeline import PipelineConfig
from .snapshots import FieldKind, SplitSpec
from .synth import SyntheticMode, SyntheticSpec, make_profile

__all__ = ["ConfigError", "Config", "parse_config", "load_config"]

_FLOAT = float
_INT = int


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _field(text: str) -> FieldKind:
    try:
        return FieldKind[text.upper()]
    except KeyError:
        raise ValueError(f"unknown field kind {text!r}") from None


KEYS = {
    # synthetic generator
    "n_dof": _INT,
    "n_time": _INT,
    "dt": _FLOAT,
    "t0": _FLOAT,
    "seed": _INT,
    "jitter_amplitude": _FLOAT,
    "jitter_frequency": _FLOAT,
    "name": str,
    "field": _field,
    "mode": str,
    # filtering / POD
    "psd_threshold": _FLOAT,
    "keep_dc": _bool,
    "delta": _FLOAT,
    "n_modes": _INT,
    "center": _bool,
    # split
    "n_train": _INT,
    "n_validation": _INT,
    # LSTM
    "sequence_length": _INT,
    "hidden_size": _INT,
    "learning_rate": _FLOAT,
    "epochs": _INT,
    "adam_beta1": _FLOAT,
    "adam_beta2": _FLOAT,
    "adam_epsilon": _FLOAT,
    "train_seed": _INT,
    # pipeline
    "input": str,
    "predict_steps": _INT,
}


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass
class Config:
    values: dict = field(default_factory=dict)
    modes: list[tuple[int, str]] = field(default_factory=list)
    lines: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def require(self, key):
        if key not in self.values:
            raise ConfigError(f"missing required key {key!r}")
        return self.values[key]

    def __contains__(self, key):
        return key in self.values

    # -------------------------------------------------------------- builders

    def synthetic_spec(self) -> SyntheticSpec:
        n_dof = self.require("n_dof")
        seed = self.get("seed", 0)
        modes = []
        for index, (line, text) in enumerate(self.modes):
            parts = [p.strip() for p in text.split(",")]
            if len(parts) != 4:
                raise ConfigError("mode needs 'amplitude,frequency,phase,profile_kind'", line)
            try:
                amp, freq, phase = (float(p) for p in parts[:3])
                profile = make_profile(parts[3], n_dof, seed, index)
                modes.append(SyntheticMode(profile, amp, freq, phase))
            except ValueError as exc:
                raise ConfigError(str(exc), line) from None
        try:
            return SyntheticSpec(
                n_dof,
                modes,
                jitter_amplitude=self.get("jitter_amplitude", 0.0),
                jitter_frequency=self.get("jitter_frequency", 0.0),
                seed=seed,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def training(self) -> TrainingConfig:
        try:
            return TrainingConfig(
                sequence_length=self.get("sequence_length", 10),
                hidden_size=self.get("hidden_size", 32),
                learning_rate=self.get("learning_rate", 1e-3),
                epochs=self.get("epochs", 1000),
                adam_beta1=self.get("adam_beta1", 0.9),
                adam_beta2=self.get("adam_beta2", 0.999),
                adam_epsilon=self.get("adam_epsilon", 1e-8),
                seed=self.get("train_seed", 0),
            )
        except ValueError as exc:
            raise ConfigError(self._locate(str(exc))) from None

    def pipeline(self) -> PipelineConfig:
        split = SplitSpec(self.require("n_train"), self.get("n_validation", 0))
        try:
            return PipelineConfig(
                split=split,
                training=self.training(),
                psd_threshold=self.get("psd_threshold", 0.0),
                keep_dc=self.get("keep_dc", True),
                delta=self.get("delta"),
                n_modes=self.get("n_modes"),
                center=self.get("center", False),
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def _locate(self, message: str) -> str:
        for key, line in self.lines.items():
            if message.startswith(key):
                return f"line {line}: {message}"
        return message


def parse_config(text: str) -> Config:
    cfg = Config()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {raw!r}", lineno)
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key == "mode":
            cfg.modes.append((lineno, value))
            continue
        if key in cfg.values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            cfg.values[key] = KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from None
        cfg.lines[key] = lineno
    return cfg


def load_config(path) -> Config:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
