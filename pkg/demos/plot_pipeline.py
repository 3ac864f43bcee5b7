"""
End-to-end reduced-order model
==============================

Offline: filter the first 450 snapshots, build the POD basis, project and
train the LSTM on the modal coefficients.  Online: roll the coefficients
forward and lift them back to the full field.  Errors inside the training
window measure compression; errors after it measure forecasting.
"""
# %%
import numpy as np

from _common import OUT
from podlstm import svg
from podlstm.lstm import TrainingConfig
from podlstm.pipeline import (
    ErrorReport, PipelineConfig, error_series, identify, speedup, timed_online_predict, offline,
)
from podlstm.snapshots import SplitSpec
from podlstm.synth import generate_eulerian, reference_spec

S = generate_eulerian(reference_spec(), 500, 0.01)
cfg = PipelineConfig(
    SplitSpec(450, 50),
    TrainingConfig(sequence_length=10, hidden_size=32, learning_rate=1e-3, epochs=2000, seed=0),
    psd_threshold=4e-4,
    delta=0.99,
)
art = offline(S, cfg)
print(f"Nr = {art.basis.n_modes}, final loss {art.loss_history[-1]:.3e}, offline {art.offline_seconds:.1f} s")

# %%
ident = error_series(art.filtered_training, identify(art))
pred, online_seconds = timed_online_predict(art, 50)
val = error_series(S.columns(450, 500), pred, 0)
report = ErrorReport(np.concatenate([ident.times, val.times]),
                     np.concatenate([ident.relative_errors, val.relative_errors]), 450)
print(f"identification mean {report.train_mean:.2e}%, prediction mean (50 steps) {report.validation_mean:.2f}%")
print(f"first 10 forecast steps: mean {val.relative_errors[:10].mean():.2f}%")
svg.line_chart([svg.Series(report.times, report.relative_errors, "relative L2 error")], OUT / "pipeline_error.svg",
               title="ROM error", xlabel="t [s]", ylabel="error [%]", vline=4.505)

# %%
# Cost accounting with the wall-clock numbers of a full-order run
print(f"online rollout of 50 steps took {online_seconds * 1e3:.1f} ms")
print(f"speed-up for 1.8e5 s of FOM time against 85 s online: {speedup(1.8e5, 85):.3g}")
