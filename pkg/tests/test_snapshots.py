import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from podlstm.snapshots import (
    FieldKind,
    FileFormatError,
    SnapshotMatrix,
    SplitSpec,
    load_snapshots,
    save_snapshots,
    split_train_validation,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def _matrix(nc=3, nt=5, seed=0, **kw):
    return SnapshotMatrix(np.random.default_rng(seed).normal(size=(nc, nt)), **kw)


def test_times_start_one_step_after_t0():
    S = _matrix(nt=3, t0=2.0, dt=0.5)
    np.testing.assert_allclose(S.times, [2.5, 3.0, 3.5])


def test_values_are_read_only_copies():
    raw = np.ones((2, 2))
    S = SnapshotMatrix(raw)
    raw[0, 0] = 5.0
    assert S.values[0, 0] == 1.0
    with pytest.raises(ValueError):
        S.values[0, 0] = 3.0


def test_nan_reports_location():
    raw = np.zeros((3, 4))
    raw[2, 1] = np.nan
    with pytest.raises(ValueError, match="dof 2, column 1"):
        SnapshotMatrix(raw)


@pytest.mark.parametrize("dt", [0.0, -1.0, np.inf])
def test_bad_dt_rejected(dt):
    with pytest.raises(ValueError):
        SnapshotMatrix(np.zeros((1, 2)), dt=dt)


def test_minimal_matrix_round_trips(tmp_path):
    S = SnapshotMatrix(np.array([[1.5, -2.0]]), t0=0.0, dt=0.1, name="eps")
    for name in ("m.bin", "m.csv"):
        save_snapshots(S, tmp_path / name)
        back = load_snapshots(tmp_path / name)
        np.testing.assert_array_equal(back.values, S.values)
        assert back.name == "eps"


def test_binary_round_trip_is_exact(tmp_path):
    S = _matrix(4, 7, t0=1.25, dt=0.01, field=FieldKind.LAGRANGIAN_Y, name="y")
    save_snapshots(S, tmp_path / "s.bin")
    assert load_snapshots(tmp_path / "s.bin").equals(S)


def test_csv_round_trip_within_1e12(tmp_path):
    S = _matrix(4, 20, t0=0.0, dt=0.01)
    save_snapshots(S, tmp_path / "s.csv")
    back = load_snapshots(tmp_path / "s.csv")
    np.testing.assert_allclose(back.values, S.values, rtol=1e-12, atol=0)
    assert abs(back.dt - S.dt) < 1e-12
    assert abs(back.t0 - S.t0) < 1e-12


def test_binary_truncated_file_is_format_error(tmp_path):
    S = _matrix()
    save_snapshots(S, tmp_path / "s.bin")
    blob = (tmp_path / "s.bin").read_bytes()
    (tmp_path / "cut.bin").write_bytes(blob[:-3])
    with pytest.raises(FileFormatError):
        load_snapshots(tmp_path / "cut.bin")


def test_bad_magic_is_format_error(tmp_path):
    (tmp_path / "x.bin").write_bytes(b"NOTASNAP" + bytes(64))
    with pytest.raises(FileFormatError):
        load_snapshots(tmp_path / "x.bin")


def test_csv_non_numeric_reports_row(tmp_path):
    (tmp_path / "x.csv").write_text("t,f_0\n0.1,1.0\n0.2,abc\n")
    with pytest.raises(FileFormatError, match="3"):
        load_snapshots(tmp_path / "x.csv")


def test_csv_non_uniform_time_rejected(tmp_path):
    (tmp_path / "x.csv").write_text("t,f_0\n0.1,1.0\n0.2,2.0\n0.4,3.0\n")
    with pytest.raises(FileFormatError):
        load_snapshots(tmp_path / "x.csv")


@pytest.mark.parametrize("nt, n_train, n_val", [(500, 450, 50), (460, 450, 10), (450, 450, 0)])
def test_split_examples(nt, n_train, n_val):
    S = _matrix(2, nt, dt=0.01)
    train, val = split_train_validation(S, SplitSpec(n_train, n_val))
    assert train.n_time == n_train and val.n_time == n_val
    np.testing.assert_array_equal(train.times, S.times[:n_train])
    np.testing.assert_allclose(val.times, S.times[n_train : n_train + n_val], rtol=1e-14)


def test_split_larger_than_matrix_rejected():
    with pytest.raises(ValueError):
        split_train_validation(_matrix(2, 10), SplitSpec(8, 3))


def test_split_too_short_for_sequence_length():
    with pytest.raises(ValueError):
        SplitSpec(10, 0).check(20, sequence_length=10)


@settings(max_examples=50, deadline=None)
@given(
    hnp.arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(2, 30)), elements=finite),
    st.data(),
)
def test_split_concatenation_restores_matrix(values, data):
    S = SnapshotMatrix(values, t0=0.3, dt=0.02)
    n_train = data.draw(st.integers(1, S.n_time))
    n_val = data.draw(st.integers(0, S.n_time - n_train))
    train, val = split_train_validation(S, SplitSpec(n_train, n_val))
    joined = np.hstack([train.values, val.values])
    np.testing.assert_array_equal(joined, S.values[:, : n_train + n_val])
    assert val.t0 == pytest.approx(train.t0 + n_train * S.dt)


@settings(max_examples=30, deadline=None)
@given(hnp.arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(2, 12)), elements=finite))
def test_binary_round_trip_property(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("rt") / "s.bin"
    S = SnapshotMatrix(values, dt=0.5)
    save_snapshots(S, path)
    assert load_snapshots(path).equals(S)
