import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twinbeam import dimensionality as dim
from twinbeam.gain import GainState
from twinbeam.grids import build_grid
from twinbeam.schmidt import TransverseModes


def _modes(m, l, lam):
    g = build_grid("radial_wavevector", (1.0, 2.0), 9)
    return TransverseModes(np.asarray(m), np.asarray(l), np.asarray(lam, dtype=float), None, None, g,
                           0.0, 1.0)


def test_single_mode_gives_one():
    s = GainState(np.array([1.0]), np.array([1.0]), 3.0, 1.0)
    q = dim.gain_quantifiers(s)
    for v in (q.K, q.K_omega, q.K_kphi, q.K_n, q.K_n_omega, q.K_n_kphi):
        assert v == pytest.approx(1.0)


@settings(max_examples=20, deadline=None)
@given(n_perp=st.integers(1, 20), n_par=st.integers(1, 20), c=st.floats(1e-3, 20))
def test_equal_modes_count_exactly(n_perp, n_par, c):
    s = GainState(np.ones(n_perp), np.ones(n_par), c, 1.0)
    q = dim.gain_quantifiers(s)
    assert q.K == pytest.approx(n_perp * n_par)
    assert q.K_n == pytest.approx(n_perp * n_par)
    assert q.K_omega == pytest.approx(n_par)
    assert q.K_kphi == pytest.approx(n_perp)


def test_weights_match_duplicated_entries():
    rng = np.random.default_rng(5)
    perp, par = rng.uniform(0.1, 1, 8), rng.uniform(0.1, 1, 5)
    w = np.array([1, 2, 2, 1, 2, 1, 2, 2], dtype=float)
    a = dim.gain_quantifiers(GainState(perp, par, 4.0, 1.0, w))
    b = dim.gain_quantifiers(GainState(np.repeat(perp, w.astype(int)), par, 4.0, 1.0))
    for name in ("K", "K_omega", "K_kphi", "K_n", "K_n_omega", "K_n_kphi"):
        assert getattr(a, name) == pytest.approx(getattr(b, name), rel=1e-12)


def test_high_gain_scaling_stays_finite():
    s = GainState(np.array([1.0, 0.5]), np.array([1.0, 0.9]), 250.0, 1.0)
    q = dim.gain_quantifiers(s)
    assert q.K == pytest.approx(1.0)
    assert np.isfinite(q.K_n)


def test_vacuum_rejected():
    with pytest.raises(dim.VacuumStateError):
        dim.gain_quantifiers(GainState(np.array([1.0]), np.array([1.0]), 0.0, 1.0))


def test_directional_counts():
    assert dim.directional_counts(_modes([0], [0], [1.0])) == pytest.approx((1.0, 1.0))
    # l = 0 for m = -1, 0, 1 with equal weights: three azimuthal orders, one radial
    r, a = dim.directional_counts(_modes([0, 1], [0, 0], [1.0, 1.0]))
    assert (r, a) == pytest.approx((1.0, 3.0))
    r, a = dim.directional_counts(_modes([0, 0], [0, 1], [1.0, 1.0]))
    assert (r, a) == pytest.approx((2.0, 1.0))


def test_width_ratio():
    assert dim.width_ratio(6.0, 2.0) == 3.0
    with pytest.raises(ValueError):
        dim.width_ratio(0.0, 1.0)


def test_averaged_spectral_ordering_over_sweep(reduced_model):
    # K_n_omega >= K_omega is checked numerically; K_n against K is only reported
    for p in reduced_model.cfg.sweep.powers():
        q = dim.gain_quantifiers(reduced_model.state(p))
        assert q.K_n_omega >= q.K_omega * (1 - 1e-9)
