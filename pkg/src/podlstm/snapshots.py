"""Snapshot matrices: one column per time instant, one row per degree of freedom.

Column ``i`` (0-based) of a matrix with start time ``t0`` and spacing ``dt``
holds the field at ``t0 + (i + 1) * dt``; the initial condition at ``t0``
itself is never stored.

Two on-disk formats are supported.

binary
    ``b"ROMSNAP1"``, then little-endian ``u64 Nc``, ``u64 Nt``, ``f64 t0``,
    ``f64 dt``, ``u8 field``, ``u16 len`` + UTF-8 name, then ``Nc*Nt`` f64
    values column-major (one snapshot after the other).
csv
    header ``t,<name>_0,...,<name>_{Nc-1}``, one row per time instant,
    values written with 17 significant digits.
"""
from __future__ import annotations

import csv
import enum
import io
import os
import struct
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "FieldKind",
    "SnapshotMatrix",
    "SplitSpec",
    "FileFormatError",
    "SnapshotFormatError",
    "load_snapshots",
    "save_snapshots",
    "split_train_validation",
]

MAGIC = b"ROMSNAP1"
_HEADER = struct.Struct("<QQddB")


class FileFormatError(ValueError):
    """Raised when a data file is malformed or violates an invariant."""


SnapshotFormatError = FileFormatError


class FieldKind(enum.IntEnum):
    EULERIAN_SCALAR = 0
    LAGRANGIAN_X = 1
    LAGRANGIAN_Y = 2
    LAGRANGIAN_Z = 3

    @property
    def is_lagrangian(self) -> bool:
        return self is not FieldKind.EULERIAN_SCALAR


@dataclass(frozen=True, eq=False)
class SnapshotMatrix:
    """Immutable ``Nc x Nt`` field history with uniform time sampling."""

    values: np.ndarray
    t0: float = 0.0
    dt: float = 1.0
    field: FieldKind = FieldKind.EULERIAN_SCALAR
    name: str = "field"

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2:
            raise ValueError(f"snapshot values must be 2-D, got shape {values.shape}")
        if values.shape[0] < 1:
            raise ValueError("snapshot matrix needs at least one degree of freedom")
        bad = np.argwhere(~np.isfinite(values))
        if bad.size:
            r, c = bad[0]
            raise ValueError(f"non-finite value at dof {r}, column {c}")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        if not np.isfinite(self.t0):
            raise ValueError("t0 must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "field", FieldKind(self.field))

    @property
    def n_dof(self) -> int:
        return self.values.shape[0]

    @property
    def n_time(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(1, self.n_time + 1)

    def with_values(self, values: np.ndarray, t0: float | None = None) -> "SnapshotMatrix":
        """Copy of this matrix carrying new values (and optionally a new ``t0``)."""
        return replace(self, values=values, t0=self.t0 if t0 is None else t0)

    def columns(self, start: int, stop: int) -> "SnapshotMatrix":
        """Columns ``start:stop`` with ``t0`` shifted so timestamps are preserved."""
        return replace(self, values=self.values[:, start:stop], t0=self.t0 + start * self.dt)

    def equals(self, other: "SnapshotMatrix") -> bool:
        return (
            self.shape == other.shape
            and np.array_equal(self.values, other.values)
            and self.t0 == other.t0
            and self.dt == other.dt
            and self.field == other.field
            and self.name == other.name
        )


@dataclass(frozen=True)
class SplitSpec:
    n_train: int
    n_validation: int = 0

    def check(self, n_time: int, sequence_length: int | None = None) -> None:
        if self.n_train < 1 or self.n_validation < 0:
            raise ValueError(f"invalid split {self}")
        if self.n_train + self.n_validation > n_time:
            raise ValueError(
                f"split needs {self.n_train + self.n_validation} columns, matrix has {n_time}"
            )
        if sequence_length is not None and self.n_train < sequence_length + 1:
            raise ValueError(
                f"n_train={self.n_train} too short for sequence length {sequence_length}"
            )


def split_train_validation(S: SnapshotMatrix, spec: SplitSpec) -> tuple[SnapshotMatrix, SnapshotMatrix]:
    """First ``n_train`` columns for training, the next ``n_validation`` for validation."""
    spec.check(S.n_time)
    train = S.columns(0, spec.n_train)
    validation = S.columns(spec.n_train, spec.n_train + spec.n_validation)
    return train, validation


# --------------------------------------------------------------------------- I/O


def _infer_format(path, fmt):
    if fmt is not None:
        if fmt not in ("binary", "csv"):
            raise ValueError(f"unknown snapshot format {fmt!r}")
        return fmt
    return "csv" if os.fspath(path).lower().endswith(".csv") else "binary"


def save_snapshots(S: SnapshotMatrix, path, format: str | None = None) -> None:
    fmt = _infer_format(path, format)
    if fmt == "binary":
        name = S.name.encode("utf-8")
        if len(name) > 0xFFFF:
            raise ValueError("name too long for binary header")
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(_HEADER.pack(S.n_dof, S.n_time, S.t0, S.dt, int(S.field)))
            fh.write(struct.pack("<H", len(name)))
            fh.write(name)
            fh.write(S.values.astype("<f8").tobytes(order="F"))
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t"] + [f"{S.name}_{j}" for j in range(S.n_dof)])
            for t, col in zip(S.times, S.values.T):
                writer.writerow([format_float(t)] + [format_float(v) for v in col])


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def load_snapshots(path, format: str | None = None, field: FieldKind | None = None) -> SnapshotMatrix:
    """Read a snapshot file.

    For CSV input the field kind is not stored, so ``field`` (default
    Eulerian) is applied; for binary input it overrides the header tag only
    when given.
    """
    fmt = _infer_format(path, format)
    if fmt == "binary":
        with open(path, "rb") as fh:
            S = _read_binary(fh.read())
    else:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            S = _read_csv(fh)
    if field is not None:
        S = replace(S, field=FieldKind(field))
    return S


def _read_binary(blob: bytes) -> SnapshotMatrix:
    if blob[:8] != MAGIC:
        raise SnapshotFormatError(f"bad magic at byte 0: {blob[:8]!r}")
    pos = 8
    if len(blob) < pos + _HEADER.size + 2:
        raise SnapshotFormatError(f"truncated header at byte {len(blob)}")
    n_dof, n_time, t0, dt, tag = _HEADER.unpack_from(blob, pos)
    pos += _HEADER.size
    if tag > 3:
        raise SnapshotFormatError(f"invalid field tag {tag} at byte {pos - 1}")
    if n_dof < 1:
        raise SnapshotFormatError("Nc must be >= 1 (byte 8)")
    if not (np.isfinite(dt) and dt > 0):
        raise SnapshotFormatError(f"invalid dt {dt} at byte 32")
    (name_len,) = struct.unpack_from("<H", blob, pos)
    pos += 2
    if len(blob) < pos + name_len:
        raise SnapshotFormatError(f"truncated name at byte {len(blob)}")
    try:
        name = blob[pos : pos + name_len].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SnapshotFormatError(f"name is not UTF-8 at byte {pos}") from exc
    pos += name_len
    expected = n_dof * n_time * 8
    if len(blob) - pos != expected:
        raise SnapshotFormatError(
            f"payload at byte {pos} has {len(blob) - pos} bytes, header implies {expected}"
        )
    values = np.frombuffer(blob, dtype="<f8", count=n_dof * n_time, offset=pos)
    values = values.reshape((n_dof, n_time), order="F")
    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        r, c = bad[0]
        offset = pos + 8 * (c * n_dof + r)
        raise SnapshotFormatError(f"non-finite value at dof {r}, column {c} (byte {offset})")
    return SnapshotMatrix(values, t0=t0, dt=dt, field=FieldKind(tag), name=name)


def _read_csv(fh: io.TextIOBase) -> SnapshotMatrix:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise SnapshotFormatError("empty CSV file (row 1)") from None
    if len(header) < 2 or header[0].strip() != "t":
        raise SnapshotFormatError("row 1: header must start with 't' followed by dof columns")
    name = _common_name(header[1:])
    times, rows = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise SnapshotFormatError(f"row {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            nums = [float(x) for x in row]
        except ValueError as exc:
            raise SnapshotFormatError(f"row {lineno}: {exc}") from None
        for col, v in enumerate(nums):
            if not np.isfinite(v):
                raise SnapshotFormatError(f"row {lineno}, column {col}: non-finite value {row[col]!r}")
        times.append(nums[0])
        rows.append(nums[1:])
    if len(times) < 2:
        raise SnapshotFormatError("CSV needs at least two time rows to infer dt")
    t = np.asarray(times)
    steps = np.diff(t)
    dt = (t[-1] - t[0]) / (len(t) - 1)
    if dt <= 0:
        raise SnapshotFormatError("time column must be increasing")
    bad = np.flatnonzero(np.abs(steps - dt) > 1e-9 * dt)
    if bad.size:
        raise SnapshotFormatError(f"row {bad[0] + 3}: non-uniform time spacing")
    return SnapshotMatrix(np.asarray(rows).T, t0=t[0] - dt, dt=dt, name=name)


def _common_name(cols: list[str]) -> str:
    stems = set()
    for j, c in enumerate(cols):
        stem, sep, idx = c.rpartition("_")
        if not sep or idx != str(j):
            raise SnapshotFormatError(f"row 1: column {j + 1} header {c!r} is not '<name>_{j}'")
        stems.add(stem)
    if len(stems) != 1:
        raise SnapshotFormatError(f"row 1: inconsistent column names {sorted(stems)}")
    return stems.pop()
