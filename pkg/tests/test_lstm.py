import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from podlstm.lstm import (
    AdamState,
    LSTMModel,
    MinMaxScaler,
    TrainingConfig,
    TrainingDivergedError,
    adam_step,
    cell_forward,
    fit_scaler,
    forward_sequence,
    init_model,
    loss_and_gradients,
    make_windows,
    mse_loss,
    predict_rollout,
    sigmoid,
    train,
)
from oracles import adam_scalar, central_difference, lstm_cell_loop, lstm_sequence_loop, mse_loop


def _random_model(D=2, H=3, seed=0, s=4):
    m = init_model(D, H, seed, sequence_length=s)
    r = np.random.default_rng(seed)
    # non-zero biases so every term of the cell is exercised
    return m.with_params({**m.params(), "b": r.normal(size=m.b.shape), "by": r.normal(size=D)})


# ------------------------------------------------------------------ scaling


def test_scaler_maps_range_to_unit_interval():
    sc = MinMaxScaler(np.array([0.0, -2.0]), np.array([4.0, 2.0]))
    np.testing.assert_allclose(sc.transform([[0, -2], [4, 2], [2, 0]]), [[-1, -1], [1, 1], [0, 0]])
    np.testing.assert_allclose(sc.inverse([[0.5, -0.5]]), [[3.0, -1.0]])


def test_constant_dimension_maps_to_zero():
    sc = fit_scaler(np.array([[2.0, 2.0, 2.0]]))
    np.testing.assert_array_equal(sc.transform([[2.0]]), [[0.0]])
    np.testing.assert_array_equal(sc.inverse([[0.7]]), [[2.0]])


@settings(max_examples=50, deadline=None)
@given(hnp.arrays(np.float64, st.tuples(st.integers(1, 3), st.integers(2, 20)), elements=st.floats(-1e3, 1e3)))
def test_scaler_round_trip(C):
    sc = fit_scaler(C)
    X = C.T
    Z = sc.transform(X)
    assert np.all(Z >= -1 - 1e-12) and np.all(Z <= 1 + 1e-12)
    np.testing.assert_allclose(sc.inverse(Z), X, atol=1e-9 * max(1.0, np.abs(C).max()))


# ------------------------------------------------------------------ windows


def test_window_counts_and_alignment():
    C = np.arange(10.0).reshape(2, 5)  # D=2, Nt=5
    ds = make_windows(C, 2)
    assert ds.inputs.shape == (3, 2, 2)
    np.testing.assert_array_equal(ds.inputs[0], [[0, 5], [1, 6]])
    np.testing.assert_array_equal(ds.targets[0], [2, 7])
    assert make_windows(np.zeros((3, 450)), 50).n_samples == 400


def test_window_longer_than_series_rejected():
    with pytest.raises(ValueError):
        make_windows(np.zeros((1, 3)), 3)


# ------------------------------------------------------------------ forward


def test_zero_model_cell():
    m = LSTMModel.zeros(2, 3)
    h, c, _ = cell_forward(m, np.ones(2), np.zeros(3), np.ones(3))
    # all gates 0.5, candidate 0: c = 0.5, h = 0.5 tanh(0.5)
    np.testing.assert_allclose(c, 0.5)
    np.testing.assert_allclose(h, 0.5 * np.tanh(0.5))


def test_sigmoid_is_stable():
    np.testing.assert_allclose(sigmoid(np.array([-800.0, 0.0, 800.0])), [0.0, 0.5, 1.0])


def test_cell_matches_scalar_loop():
    m = _random_model()
    r = np.random.default_rng(1)
    x, h0, c0 = r.normal(size=2), r.normal(size=3), r.normal(size=3)
    h, c, cache = cell_forward(m, x, h0, c0)
    h_ref, c_ref = lstm_cell_loop(m.W, m.A, m.b, x, h0, c0)
    np.testing.assert_allclose(h, h_ref, atol=1e-14)
    np.testing.assert_allclose(c, c_ref, atol=1e-14)
    _, _, _, _, i, f, o, g, _ = cache
    assert np.all((0 < i) & (i < 1) & (0 < f) & (f < 1) & (0 < o) & (o < 1))
    assert np.all(np.abs(g) <= 1)


def test_sequence_matches_scalar_loop_single_and_batch():
    m = _random_model()
    windows = np.random.default_rng(2).normal(size=(3, 4, 2))
    batch = forward_sequence(m, windows)
    for k in range(3):
        ref = lstm_sequence_loop(m.W, m.A, m.b, m.Wy, m.by, windows[k])
        np.testing.assert_allclose(forward_sequence(m, windows[k]), ref, atol=1e-13)
        np.testing.assert_allclose(batch[k], ref, atol=1e-13)


def test_mse_matches_loop():
    r = np.random.default_rng(3)
    p, t = r.normal(size=(5, 2)), r.normal(size=(5, 2))
    assert mse_loss(p, t) == pytest.approx(mse_loop(p, t), rel=1e-14)
    assert mse_loss([[1.0, 2.0]], [[1.0, 0.0]]) == 2.0


def test_init_is_deterministic_and_seeded():
    a, b, c = init_model(3, 5, 11), init_model(3, 5, 11), init_model(3, 5, 12)
    for name in ("W", "A", "Wy"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
        assert not np.array_equal(getattr(a, name), getattr(c, name))
    np.testing.assert_array_equal(a.gate("forget")[2], 1.0)
    np.testing.assert_array_equal(a.gate("input")[2], 0.0)


# ------------------------------------------------------------------ gradients


@pytest.mark.parametrize("seed", range(3))
def test_gradients_match_central_differences(seed):
    m = _random_model(D=2, H=2, seed=seed, s=3)
    ds = make_windows(np.random.default_rng(seed + 10).uniform(-1, 1, size=(2, 8)), 3)
    _, grads = loss_and_gradients(m.params(), ds)
    fd = central_difference(lambda p: loss_and_gradients(p, ds)[0], m.params())
    for name, g in grads.items():
        np.testing.assert_allclose(g, fd[name], rtol=1e-5, atol=1e-9, err_msg=name)


def test_output_bias_gradient_is_mean_residual():
    m = _random_model()
    ds = make_windows(np.random.default_rng(5).normal(size=(2, 9)), 4)
    _, grads = loss_and_gradients(m.params(), ds)
    resid = forward_sequence(m, ds.inputs) - ds.targets
    np.testing.assert_allclose(grads["by"], 2 * resid.sum(axis=0) / resid.size, atol=1e-15)


# ------------------------------------------------------------------ Adam


def test_first_adam_step_moves_by_learning_rate():
    cfg = TrainingConfig(learning_rate=0.1)
    p, _ = adam_step({"w": np.array([1.0])}, {"w": np.array([1.0])}, AdamState(), cfg)
    assert p["w"][0] == pytest.approx(0.9, abs=1e-8)


def test_adam_matches_scalar_oracle():
    cfg = TrainingConfig(learning_rate=0.05)
    grads = [0.3, -1.2, 0.7, 0.05, 2.0]
    params, state = {"w": np.array([0.5])}, AdamState()
    for g in grads:
        params, state = adam_step(params, {"w": np.array([g])}, state, cfg)
    assert state.step == 5
    assert params["w"][0] == pytest.approx(adam_scalar(0.5, grads, 0.05), rel=1e-14)


@pytest.mark.parametrize(
    "kw", [{"epochs": 0}, {"hidden_size": 0}, {"sequence_length": 0}, {"learning_rate": 0.0}, {"adam_beta1": 1.0}]
)
def test_training_config_validation(kw):
    with pytest.raises(ValueError):
        TrainingConfig(**kw)


# ------------------------------------------------------------------ training


def test_constant_series_is_learned_quickly():
    C = np.vstack([np.full(30, 2.0), np.linspace(-1, 1, 30) * 0 + 0.5])
    _, history = train(C, TrainingConfig(sequence_length=3, hidden_size=4, learning_rate=1e-2, epochs=200))
    assert history[-1] < 1e-8


def test_training_reduces_loss_and_is_deterministic():
    t = np.arange(60) * 0.05
    C = np.vstack([np.sin(2 * np.pi * t), np.cos(2 * np.pi * t)])
    cfg = TrainingConfig(sequence_length=5, hidden_size=6, learning_rate=1e-2, epochs=60, seed=3)
    m1, h1 = train(C, cfg)
    m2, h2 = train(C, cfg)
    assert h1[-1] < h1[0]
    np.testing.assert_array_equal(h1, h2)
    for name in ("W", "A", "b", "Wy", "by"):
        np.testing.assert_array_equal(getattr(m1, name), getattr(m2, name))


def test_divergence_is_reported():
    C = np.vstack([np.linspace(0, 1, 20)])
    cfg = TrainingConfig(sequence_length=2, hidden_size=2, learning_rate=1e300, epochs=5)
    with pytest.raises(TrainingDivergedError):
        train(C, cfg)


# ------------------------------------------------------------------ rollout


def test_rollout_shapes_and_zero_steps():
    m = _random_model(s=3)
    seed = np.zeros((5, 2))
    assert predict_rollout(m, seed, 0).shape == (0, 2)
    assert predict_rollout(m, seed, 4).shape == (4, 2)
    with pytest.raises(ValueError):
        predict_rollout(m, np.zeros((2, 2)), 1)


def test_rollout_feeds_back_predictions():
    m = _random_model(s=3)
    seed = np.random.default_rng(7).uniform(-1, 1, size=(3, 2))
    out = predict_rollout(m, seed, 3)
    window = list(seed)
    for k in range(3):
        y = lstm_sequence_loop(m.W, m.A, m.b, m.Wy, m.by, np.array(window[-3:]))
        np.testing.assert_allclose(out[k], y, atol=1e-13)
        window.append(y)


def test_rollout_uses_only_last_window():
    m = _random_model(s=2)
    seed = np.random.default_rng(8).normal(size=(6, 2))
    np.testing.assert_array_equal(predict_rollout(m, seed, 3), predict_rollout(m, seed[-2:], 3))
