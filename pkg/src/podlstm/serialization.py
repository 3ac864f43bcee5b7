"""Binary files for POD bases and trained LSTM models (little-endian f64).

Basis (``ROMPOD_1``)::

    magic, u64 Nc, u64 Nr, u64 L, L singular values, Nc*Nr modes column-major

Model (``ROMLSTM1``)::

    magic, u64 D, u64 H,
    for gate in (input, forget, output, candidate): W_g (H x D), A_g (H x H), b_g (H)
    W_y (D x H), b_y (D), D scaler pairs (min, max),
    u64 sequence length

Matrices inside the model file are row-major.  The trailing sequence length
lets a model file be used for prediction without its training config.
"""
from __future__ import annotations

import struct

import numpy as np

from .lstm import LSTMModel, MinMaxScaler
from .pod import PODBasis
from .snapshots import FileFormatError

__all__ = ["save_basis", "load_basis", "save_model", "load_model"]

BASIS_MAGIC = b"ROMPOD_1"
MODEL_MAGIC = b"ROMLSTM1"


class _Reader:
    def __init__(self, blob: bytes, what: str):
        self.blob, self.pos, self.what = blob, 0, what

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise FileFormatError(f"{self.what}: truncated at byte {len(self.blob)}, needed {self.pos + n}")
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def f64(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)

    def done(self):
        if self.pos != len(self.blob):
            raise FileFormatError(f"{self.what}: {len(self.blob) - self.pos} trailing bytes at byte {self.pos}")


def _f64(a) -> bytes:
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


def save_basis(basis: PODBasis, path) -> None:
    if basis.mean is not None:
        raise ValueError("basis file format has no slot for a centering mean")
    with open(path, "wb") as fh:
        fh.write(BASIS_MAGIC)
        fh.write(struct.pack("<QQQ", basis.n_dof, basis.n_modes, basis.singular_values.size))
        fh.write(_f64(basis.singular_values))
        fh.write(basis.modes.astype("<f8").tobytes(order="F"))


def load_basis(path) -> PODBasis:
    with open(path, "rb") as fh:
        r = _Reader(fh.read(), f"basis file {path}")
    if r.take(8) != BASIS_MAGIC:
        raise FileFormatError(f"basis file {path}: bad magic at byte 0")
    n_dof, n_modes, n_sv = r.u64(), r.u64(), r.u64()
    sv = r.f64(n_sv)
    modes = r.f64(n_dof * n_modes).reshape((n_dof, n_modes), order="F")
    r.done()
    return PODBasis(modes, sv)


def save_model(model: LSTMModel, path) -> None:
    D, H = model.input_size, model.hidden_size
    parts = [MODEL_MAGIC, struct.pack("<QQ", D, H)]
    for g in range(4):
        parts += [_f64(model.W[g]), _f64(model.A[g]), _f64(model.b[g])]
    parts += [_f64(model.Wy), _f64(model.by)]
    parts.append(_f64(np.column_stack([model.scaler.lo, model.scaler.hi])))
    parts.append(struct.pack("<Q", model.sequence_length))
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def load_model(path) -> LSTMModel:
    with open(path, "rb") as fh:
        r = _Reader(fh.read(), f"model file {path}")
    if r.take(8) != MODEL_MAGIC:
        raise FileFormatError(f"model file {path}: bad magic at byte 0")
    D, H = r.u64(), r.u64()
    W, A, b = np.empty((4, H, D)), np.empty((4, H, H)), np.empty((4, H))
    for g in range(4):
        W[g] = r.f64(H * D).reshape(H, D)
        A[g] = r.f64(H * H).reshape(H, H)
        b[g] = r.f64(H)
    Wy = r.f64(D * H).reshape(D, H)
    by = r.f64(D)
    pairs = r.f64(2 * D).reshape(D, 2)
    s = r.u64()
    r.done()
    return LSTMModel(W, A, b, Wy, by, MinMaxScaler(pairs[:, 0], pairs[:, 1]), s)
