"""
Learning a single modal coefficient with the LSTM
=================================================

A pure 1 Hz tone sampled at 100 Hz is scaled to [-1, 1], cut into
one-step-ahead windows of length 10 and fit with full-batch Adam.  The
trained network then forecasts ten steps past the training window in
closed loop.
"""
# %%
import numpy as np

from _common import OUT
from podlstm import svg
from podlstm.lstm import TrainingConfig, predict_rollout, train

dt = 0.01
t = dt * np.arange(1, 451)
C = np.cos(2 * np.pi * t)[None]  # one mode, 450 snapshots

cfg = TrainingConfig(sequence_length=10, hidden_size=32, learning_rate=1e-3, epochs=2000, seed=0)
model, history = train(C, cfg)
print(f"loss: first epoch {history[0]:.3e}, last epoch {history[-1]:.3e}")
svg.line_chart([svg.Series(np.arange(history.size), history, "MSE")], OUT / "lstm_loss.svg",
               title="training loss", xlabel="epoch", log_y=True)

# %%
future_t = dt * np.arange(451, 461)
pred = predict_rollout(model, C.T, 10)[:, 0]
truth = np.cos(2 * np.pi * future_t)
for tk, p, q in zip(future_t, pred, truth):
    print(f"t={tk:.2f}  forecast {p:+.5f}  exact {q:+.5f}  error {100 * abs(p - q) / abs(q):.3f}%")
