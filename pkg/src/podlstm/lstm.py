"""Single-layer LSTM over reduced coefficients, written directly in numpy.

Gate order everywhere is (input, forget, output, candidate).  With ``x`` the
scaled coefficient vector and ``h``/``c`` the hidden and cell state::

    i = sigmoid(W_i x + A_i h + b_i)      f = sigmoid(W_f x + A_f h + b_f)
    o = sigmoid(W_o x + A_o h + b_o)      g = tanh(W_c x + A_c h + b_c)
    c' = f * c + i * g                    h' = o * tanh(c')

A window of ``s`` vectors is consumed from zero state and the last hidden
state goes through a linear head ``y = W_y h + b_y`` to give the next
coefficient vector.  Training is full-batch Adam on the mean squared error
in scaled space; gradients come from exact backpropagation through time.
"""
from __future__ import annotations

import logging
from functools import lru_cache
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .pod import ReducedTrajectory

__all__ = [
    "MinMaxScaler",
    "LSTMModel",
    "TrainingConfig",
    "SequenceDataset",
    "AdamState",
    "TrainingDivergedError",
    "fit_scaler",
    "make_windows",
    "init_model",
    "cell_forward",
    "forward_sequence",
    "mse_loss",
    "loss_and_gradients",
    "backward",
    "adam_step",
    "train",
    "predict_rollout",
]

log = logging.getLogger(__name__)

GATES = ("input", "forget", "output", "candidate")
PARAM_NAMES = ("W", "A", "b", "Wy", "by")


class TrainingDivergedError(FloatingPointError):
    def __init__(self, epoch: int, loss: float):
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")
        self.epoch = epoch
        self.loss = loss


def sigmoid(z):
    # tanh form never overflows
    return 0.5 * (1.0 + np.tanh(0.5 * z))


# ----------------------------------------------------------------- scaling


@dataclass(frozen=True, eq=False)
class MinMaxScaler:
    """Per-dimension affine map of ``[lo, hi]`` onto ``[-1, 1]``.

    A dimension with ``hi == lo`` maps to 0 and inverts back to ``lo``.
    """

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64)
        hi = np.asarray(self.hi, dtype=np.float64)
        if lo.shape != hi.shape or np.any(hi < lo):
            raise ValueError("scaler needs hi >= lo per dimension")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def _span(self):
        return np.where(self.hi > self.lo, self.hi - self.lo, 1.0)

    def transform(self, x):
        """Scale ``x`` of shape ``(..., D)``."""
        x = np.asarray(x, dtype=np.float64)
        z = 2.0 * (x - self.lo) / self._span - 1.0
        return np.where(self.hi > self.lo, z, 0.0)

    def inverse(self, z):
        z = np.asarray(z, dtype=np.float64)
        x = (z + 1.0) * 0.5 * self._span + self.lo
        return np.where(self.hi > self.lo, x, self.lo)


def _time_major(C) -> np.ndarray:
    """Coefficient history as ``(Nt, D)`` from a trajectory or a ``D x Nt`` array."""
    if isinstance(C, ReducedTrajectory):
        return C.coefficients.T
    C = np.asarray(C, dtype=np.float64)
    if C.ndim != 2:
        raise ValueError("coefficient history must be 2-D")
    return C.T


def fit_scaler(C) -> MinMaxScaler:
    X = _time_major(C)
    return MinMaxScaler(X.min(axis=0), X.max(axis=0))


# ----------------------------------------------------------------- datasets


@dataclass(frozen=True, eq=False)
class SequenceDataset:
    inputs: np.ndarray  # (n_samples, s, D)
    targets: np.ndarray  # (n_samples, D)

    @property
    def n_samples(self) -> int:
        return self.inputs.shape[0]


def make_windows(C, s: int) -> SequenceDataset:
    """Sample ``j`` maps columns ``j..j+s-1`` to column ``j+s``."""
    X = _time_major(C)
    n_time = X.shape[0]
    if s < 1:
        raise ValueError("sequence length must be >= 1")
    if n_time <= s:
        raise ValueError(f"need more than s={s} snapshots, got {n_time}")
    idx = np.arange(n_time - s)[:, None] + np.arange(s)[None, :]
    return SequenceDataset(X[idx], X[s:].copy())


# ----------------------------------------------------------------- model


@dataclass(eq=False)
class LSTMModel:
    """Stacked gate parameters: ``W[g]`` is ``H x D``, ``A[g]`` is ``H x H``."""

    W: np.ndarray
    A: np.ndarray
    b: np.ndarray
    Wy: np.ndarray
    by: np.ndarray
    scaler: MinMaxScaler
    sequence_length: int = 1

    def __post_init__(self):
        H, D = self.W.shape[1:]
        if self.W.shape != (4, H, D) or self.A.shape != (4, H, H) or self.b.shape != (4, H):
            raise ValueError("inconsistent gate parameter shapes")
        if self.Wy.shape != (D, H) or self.by.shape != (D,):
            raise ValueError("inconsistent output head shapes")
        if self.scaler.lo.shape != (D,):
            raise ValueError("scaler dimension does not match model input size")
        for name in PARAM_NAMES:
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite entries in {name}")

    @property
    def hidden_size(self) -> int:
        return self.W.shape[1]

    @property
    def input_size(self) -> int:
        return self.W.shape[2]

    def params(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def with_params(self, params: dict[str, np.ndarray]) -> "LSTMModel":
        return LSTMModel(**params, scaler=self.scaler, sequence_length=self.sequence_length)

    def gate(self, name: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        g = GATES.index(name)
        return self.W[g], self.A[g], self.b[g]

    @classmethod
    def zeros(cls, input_size: int, hidden_size: int, sequence_length: int = 1) -> "LSTMModel":
        D, H = input_size, hidden_size
        return cls(
            np.zeros((4, H, D)), np.zeros((4, H, H)), np.zeros((4, H)),
            np.zeros((D, H)), np.zeros(D),
            MinMaxScaler(-np.ones(D), np.ones(D)), sequence_length,
        )


def init_model(input_size: int, hidden_size: int, seed: int, scaler=None, sequence_length: int = 1) -> LSTMModel:
    """Glorot-uniform weights from the SplitMix64 streams of ``seed``.

    Stream ``g`` fills ``W[g]``, stream ``4 + g`` fills ``A[g]``, stream 8
    fills ``W_y``.  Biases are zero except the forget gate, which starts at 1.
    """
    D, H = input_size, hidden_size

    def glorot(stream, shape):
        limit = np.sqrt(6.0 / (shape[0] + shape[1]))
        return rng.uniform(seed, stream, shape[0] * shape[1], -limit, limit).reshape(shape)

    W = np.stack([glorot(g, (H, D)) for g in range(4)])
    A = np.stack([glorot(4 + g, (H, H)) for g in range(4)])
    b = np.zeros((4, H))
    b[GATES.index("forget")] = 1.0
    Wy = glorot(8, (D, H))
    if scaler is None:
        scaler = MinMaxScaler(-np.ones(D), np.ones(D))
    return LSTMModel(W, A, b, Wy, np.zeros(D), scaler, sequence_length)


# ----------------------------------------------------------------- forward


@lru_cache(maxsize=None)
def _gate_scale(H):
    # sigmoid(z) = (1 + tanh(z/2)) / 2 lets one tanh call cover all four gates
    return np.concatenate([np.full(3 * H, 0.5), np.ones(H)])


def _step(Wf, Af, bf, H, x, h_prev, c_prev):
    z = x @ Wf.T + h_prev @ Af.T + bf
    a = np.tanh(z * _gate_scale(H))
    sig = 0.5 * (1.0 + a[..., : 3 * H])
    i, f, o = sig[..., :H], sig[..., H : 2 * H], sig[..., 2 * H :]
    g = a[..., 3 * H :]
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    return h, c, (x, h_prev, c_prev, z, i, f, o, g, tc)


def _flat(params):
    W, A, b = params["W"], params["A"], params["b"]
    H = W.shape[1]
    return W.reshape(4 * H, -1), A.reshape(4 * H, H), b.reshape(4 * H), H


def cell_forward(model: LSTMModel, x, h_prev, c_prev):
    """One LSTM step; works on single vectors or on batches ``(n, D)``.

    The cache holds ``(x, h_prev, c_prev, z, i, f, o, g, tanh(c))`` where
    ``z`` are the stacked gate pre-activations.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.input_size:
        raise ValueError(f"input has size {x.shape[-1]}, model expects {model.input_size}")
    h_prev = np.asarray(h_prev, dtype=np.float64)
    c_prev = np.asarray(c_prev, dtype=np.float64)
    if h_prev.shape[-1] != model.hidden_size or c_prev.shape[-1] != model.hidden_size:
        raise ValueError("state size does not match hidden size")
    Wf, Af, bf, H = _flat(model.params())
    return _step(Wf, Af, bf, H, x, h_prev, c_prev)


@dataclass
class _Trace:
    """Time-major buffers of one batched forward pass."""

    X: np.ndarray  # (s, n, D) inputs
    act: np.ndarray  # (s, n, 4H) gate activations i, f, o, g
    hs: np.ndarray  # (s + 1, n, H) hidden states, hs[0] = 0
    cs: np.ndarray  # (s + 1, n, H) cell states, cs[0] = 0
    tc: np.ndarray  # (s, n, H) tanh of cell states


def _forward(params, X):
    """Run windows ``X`` of shape ``(n, s, D)``; returns predictions and the trace."""
    Wf, Af, bf, H = _flat(params)
    n, s, D = X.shape
    Xt = np.ascontiguousarray(X.transpose(1, 0, 2))
    # input projections for every step in one product
    act = (Xt.reshape(s * n, D) @ Wf.T).reshape(s, n, 4 * H)
    act += bf
    hs = np.zeros((s + 1, n, H))
    cs = np.zeros((s + 1, n, H))
    tc = np.empty((s, n, H))
    scale = _gate_scale(H)
    rec = np.empty((n, 4 * H))
    ig = np.empty((n, H))
    for t in range(s):
        a = act[t]
        np.matmul(hs[t], Af.T, out=rec)
        a += rec
        a *= scale
        np.tanh(a, out=a)
        sig = a[:, : 3 * H]
        sig += 1.0
        sig *= 0.5
        i, f, o, g = a[:, :H], a[:, H : 2 * H], a[:, 2 * H : 3 * H], a[:, 3 * H :]
        np.multiply(f, cs[t], out=cs[t + 1])
        np.multiply(i, g, out=ig)
        cs[t + 1] += ig
        np.tanh(cs[t + 1], out=tc[t])
        np.multiply(o, tc[t], out=hs[t + 1])
    y = hs[s] @ params["Wy"].T + params["by"]
    return y, _Trace(Xt, act, hs, cs, tc)


def forward_sequence(model: LSTMModel, window) -> np.ndarray:
    """Prediction (scaled space) after consuming ``window`` from zero state.

    ``window`` is ``(s, D)`` for one sequence or ``(n, s, D)`` for a batch.
    """
    window = np.asarray(window, dtype=np.float64)
    single = window.ndim == 2
    X = window[None] if single else window
    if X.ndim != 3 or X.shape[2] != model.input_size:
        raise ValueError(f"window shape {window.shape} incompatible with input size {model.input_size}")
    y, _ = _forward(model.params(), X)
    return y[0] if single else y


def mse_loss(predictions, targets) -> float:
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch {p.shape} vs {t.shape}")
    return float(np.mean((p - t) ** 2))


# ----------------------------------------------------------------- backward


def loss_and_gradients(params: dict[str, np.ndarray], dataset: SequenceDataset):
    """MSE over all samples and outputs, and its exact gradient (BPTT).

    State is reset to zero at the start of every window, so the recursion is
    truncated at window boundaries.
    """
    X, T = dataset.inputs, dataset.targets
    Wf, Af, bf, H = _flat(params)
    y, tr = _forward(params, X)
    n, s, D = X.shape
    resid = y - T
    loss = float(np.mean(resid**2))

    dy = 2.0 * resid / resid.size
    dWy = dy.T @ tr.hs[s]
    dby = dy.sum(axis=0)
    dh = dy @ params["Wy"]
    dc = np.zeros((n, H))
    dz = np.empty((s, n, 4 * H))
    tmp = np.empty((n, H))
    for t in range(s - 1, -1, -1):
        a = tr.act[t]
        i, f, o, g = a[:, :H], a[:, H : 2 * H], a[:, 2 * H : 3 * H], a[:, 3 * H :]
        tc = tr.tc[t]
        # dc += dh * o * (1 - tc^2)
        np.multiply(tc, tc, out=tmp)
        np.subtract(1.0, tmp, out=tmp)
        tmp *= o
        tmp *= dh
        dc += tmp
        d = dz[t]
        np.multiply(dc, g, out=d[:, :H])
        d[:, :H] *= i
        d[:, :H] *= 1.0 - i
        np.multiply(dc, tr.cs[t], out=d[:, H : 2 * H])
        d[:, H : 2 * H] *= f
        d[:, H : 2 * H] *= 1.0 - f
        np.multiply(dh, tc, out=d[:, 2 * H : 3 * H])
        d[:, 2 * H : 3 * H] *= o
        d[:, 2 * H : 3 * H] *= 1.0 - o
        np.multiply(dc, i, out=d[:, 3 * H :])
        d[:, 3 * H :] *= 1.0 - g * g
        dh = d @ Af
        dc *= f

    flat_dz = dz.reshape(s * n, 4 * H)
    grads = {
        "W": (flat_dz.T @ tr.X.reshape(s * n, D)).reshape(4, H, D),
        "A": (flat_dz.T @ tr.hs[:s].reshape(s * n, H)).reshape(4, H, H),
        "b": flat_dz.sum(axis=0).reshape(4, H),
        "Wy": dWy,
        "by": dby,
    }
    return loss, grads


def backward(model: LSTMModel, dataset: SequenceDataset) -> dict[str, np.ndarray]:
    return loss_and_gradients(model.params(), dataset)[1]


# ----------------------------------------------------------------- optimiser


@dataclass(frozen=True)
class TrainingConfig:
    sequence_length: int = 10
    hidden_size: int = 32
    learning_rate: float = 1e-3
    epochs: int = 1000
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    seed: int = 0
    batch: str = "full"

    def __post_init__(self):
        if self.sequence_length < 1:
            raise ValueError("sequence_length must be >= 1")
        if self.hidden_size < 1:
            raise ValueError("hidden_size must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not (0 < self.adam_beta1 < 1 and 0 < self.adam_beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")
        if not self.adam_epsilon > 0:
            raise ValueError("adam_epsilon must be > 0")
        if self.batch != "full":
            raise ValueError("only full-batch training is supported")


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0


def adam_step(params, grads, state: AdamState, cfg: TrainingConfig):
    """Bias-corrected Adam update; returns new ``(params, state)``."""
    b1, b2, eps, lr = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon, cfg.learning_rate
    t = state.step + 1
    new_params, m_out, v_out = {}, {}, {}
    for name, p in params.items():
        g = grads[name]
        m = b1 * state.m.get(name, 0.0) + (1.0 - b1) * g
        v = b2 * state.v.get(name, 0.0) + (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1**t)
        v_hat = v / (1.0 - b2**t)
        new_params[name] = p - lr * m_hat / (np.sqrt(v_hat) + eps)
        m_out[name], v_out[name] = m, v
    return new_params, AdamState(m_out, v_out, t)


def train(C_train, cfg: TrainingConfig, log_every: int = 0):
    """Fit scaler and LSTM on a training coefficient history.

    Returns ``(model, loss_history)``; ``loss_history[e]`` is the scaled-space
    MSE of the parameters entering epoch ``e``.
    """
    scaler = fit_scaler(C_train)
    X = scaler.transform(_time_major(C_train))
    dataset = make_windows(X.T, cfg.sequence_length)
    model = init_model(X.shape[1], cfg.hidden_size, cfg.seed, scaler, cfg.sequence_length)
    params = model.params()
    state = AdamState()
    history = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        # overflow shows up as a non-finite loss, reported just below
        with np.errstate(over="ignore", invalid="ignore"):
            loss, grads = loss_and_gradients(params, dataset)
        if not np.isfinite(loss):
            raise TrainingDivergedError(epoch, loss)
        history[epoch] = loss
        params, state = adam_step(params, grads, state, cfg)
        if log_every and epoch % log_every == 0:
            log.info("epoch %d loss %.6e", epoch, loss)
    final = model.with_params(params)
    return final, history


# ----------------------------------------------------------------- rollout


def predict_rollout(model: LSTMModel, seed_window, n_steps: int) -> np.ndarray:
    """Closed-loop forecast of ``n_steps`` coefficient vectors.

    ``seed_window`` is ``(s, D)`` in unscaled coefficient space, oldest row
    first; only its last ``model.sequence_length`` rows are used.  Each
    prediction is appended to the window and the oldest row dropped.
    """
    seed_window = np.asarray(seed_window, dtype=np.float64)
    D = model.input_size
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    if n_steps == 0:
        return np.empty((0, D))
    s = model.sequence_length
    if seed_window.ndim != 2 or seed_window.shape[1] != D or seed_window.shape[0] < s:
        raise ValueError(f"seed window must be (>={s}, {D}), got {seed_window.shape}")
    window = model.scaler.transform(seed_window[-s:])
    out = np.empty((n_steps, D))
    for k in range(n_steps):
        y = forward_sequence(model, window)
        out[k] = y
        window = np.vstack([window[1:], y[None]])
    return model.scaler.inverse(out)
