import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twinbeam import gain


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=50))
def test_bogoliubov_identity(xs):
    f = gain.evolve(np.array(xs), 1.0)
    np.testing.assert_allclose(f.U**2 - f.V**2, 1.0, atol=1e-10)


def test_gain_range_guarded():
    with pytest.raises(gain.GainRangeError):
        gain.evolve(np.array([400.0]), 1.0)
    with pytest.raises(gain.GainRangeError):
        gain.GainState(np.array([1.0]), np.array([1.0]), 500.0, 1.0)


def test_photon_numbers_consistent():
    rng = np.random.default_rng(3)
    st_ = gain.GainState(rng.uniform(0, 1, 700), rng.uniform(0, 1, 30), 2.0, 1.0,
                         rng.integers(1, 3, 700).astype(float))
    x = st_.gain_argument()
    total = float(st_.perp_weight @ (np.sinh(x) ** 2).sum(axis=1))
    assert gain.photon_number(st_) == pytest.approx(total)
    assert gain.mode_photon_numbers(st_).sum() == pytest.approx(total)
    assert st_.perp_weight @ gain.transverse_photon_numbers(st_) == pytest.approx(total)


def test_with_power_scales_coupling():
    s = gain.GainState(np.array([1.0]), np.array([1.0]), 2.0, 1.0)
    assert s.with_power(4.0, 1.0).top_gain == pytest.approx(4.0)


@settings(max_examples=20, deadline=None)
@given(n0=st.floats(1e2, 1e6), g0=st.floats(20, 200))
def test_fit_recovers_parameters(n0, g0):
    p = np.logspace(-7, np.log10(5e-2), 20)
    fit = gain.fit_gain(p, n0 * np.sinh(g0 * np.sqrt(p)) ** 2)
    assert fit.N_s0 == pytest.approx(n0, rel=1e-6)
    assert fit.g0 == pytest.approx(g0, rel=1e-6)
    assert fit.residual < 1e-8


def test_fit_needs_range():
    with pytest.raises(ValueError):
        gain.fit_gain([1, 2, 3, 4, 5], [1, 2, 3, 4, 5])
