"""Non-intrusive POD-LSTM reduced-order modelling.

Offline: PSD-threshold filtering of snapshot rows, POD on the filtered
training window, LSTM training on the modal coefficients.  Online:
autoregressive coefficient rollout and reconstruction.
"""
from .fft import FilterConfig, dft_forward, dft_inverse, filter_snapshots, psd
from .lstm import LSTMModel, TrainingConfig, predict_rollout, train
from .pipeline import (
    ErrorReport,
    PipelineConfig,
    RomArtifacts,
    error_series,
    identify,
    offline,
    online_predict,
    relative_l2_error,
    speedup,
)
from .pod import PODBasis, ReducedTrajectory, compute_basis, cumulative_energy, project, reconstruct, select_modes
from .snapshots import FieldKind, SnapshotMatrix, SplitSpec, load_snapshots, save_snapshots, split_train_validation
from .synth import SyntheticMode, SyntheticSpec, generate_eulerian, generate_lagrangian, make_profile

__version__ = "0.1.0"
