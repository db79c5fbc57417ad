import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from twinbeam import io


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, 7, elements=st.floats(allow_nan=False, allow_infinity=False)),
       arrays(np.int64, 7, elements=st.integers(-10**12, 10**12)))
def test_csv_round_trip_exact(tmp_path_factory, values, ints):
    p = tmp_path_factory.mktemp("csv") / "a.csv"
    io.write_csv(p, {"x": values, "n": ints}, {"config_hash": "abc"}, {"x": "m", "n": "1"})
    meta, cols = io.read_csv(p)
    assert meta["config_hash"] == "abc" and meta["units"] == "x=m, n=1"
    np.testing.assert_array_equal(cols["x"], values)
    np.testing.assert_array_equal(cols["n"], ints)


def test_csv_is_deterministic(tmp_path):
    cols = {"x": np.linspace(0, 1, 5)}
    a = io.write_csv(tmp_path / "a.csv", cols, {"k": 1})
    b = io.write_csv(tmp_path / "b.csv", cols, {"k": 1})
    assert a.read_bytes() == b.read_bytes()


def test_transverse_cache_round_trip(tmp_path, reduced_model):
    m = reduced_model.transverse
    p = tmp_path / "t.npz"
    io.save_transverse_eigenvalues(p, m, "d1")
    back, cut = io.load_transverse_eigenvalues(p, "d1")
    assert cut is None
    np.testing.assert_array_equal(back.eigenvalues, m.eigenvalues)
    np.testing.assert_array_equal(back.grid.weights, m.grid.weights)
    assert io.load_transverse_eigenvalues(p, "other") is None
