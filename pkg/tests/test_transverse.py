import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from twinbeam import pipeline, transverse
from twinbeam.correlations import fwhm
from twinbeam.gain import GainState
from twinbeam.grids import build_grid


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_hankel_gaussian_pair(a):
    # int dk k exp(-k^2 a^2) J_0(k r) = exp(-r^2 / (4 a^2)) / (2 a^2)
    g = build_grid("radial_wavevector", (0.0, 12.0 / a), 135, panel_nodes=9)
    r = np.linspace(0, 6 * a, 41)
    ht = transverse.HankelTransform(g, r)
    u = np.sqrt(g.nodes) * np.exp(-(g.nodes * a) ** 2)
    for m, e in ht.matrices(0):
        got = u @ e
    # the sqrt(k) factor near k = 0 limits the interpolant to about 1e-5 of the peak
    peak = 1 / (2 * a * a)
    np.testing.assert_allclose(got.real, np.exp(-r**2 / (4 * a * a)) * peak, atol=1e-5 * peak)


@pytest.mark.parametrize("m", [0, 3, 40])
def test_hankel_ring_profile_against_adaptive_quadrature(m):
    # modes are concentrated on the emission ring, away from k = 0
    g = build_grid("radial_wavevector", (2.0, 18.0), 135, panel_nodes=9)
    r = np.array([0.0, 0.3, 1.1, 2.5, 4.0])
    prof = lambda k: np.exp(-((k - 10.0) ** 2))
    e = dict(transverse.HankelTransform(g, r).matrices(m))[m]
    got = prof(g.nodes) @ e
    ref = [integrate.quad(lambda k: math.sqrt(k) * prof(k) * special.jv(m, k * x), 2.0, 18.0,
                          epsabs=1e-13, limit=200)[0] for x in r]
    np.testing.assert_allclose(got, transverse.i_power(m) * np.array(ref), atol=1e-10)


def test_hankel_phase_convention():
    # m = 1: int dk k^2 exp(-k^2) J_1(k r) = (r / 4) exp(-r^2 / 4), times i
    g = build_grid("radial_wavevector", (0.0, 12.0), 135, panel_nodes=9)
    r = np.linspace(0, 6, 31)
    u = g.nodes**1.5 * np.exp(-g.nodes**2)
    e = dict(transverse.HankelTransform(g, r).matrices(1))[1]
    np.testing.assert_allclose(u @ e, 1j * r / 4 * np.exp(-r**2 / 4), atol=1e-8)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), kind=st.sampled_from(["auto", "cross"]))
def test_azimuthal_resum_matches_explicit_pm_m_sum(seed, kind):
    rng = np.random.default_rng(seed)
    n = 40
    m = rng.integers(0, 7, n)
    values = rng.normal(size=n) + 1j * rng.normal(size=n)
    state = GainState(rng.uniform(0.1, 1, n), rng.uniform(0.1, 1, 6), 3.0, 1.0)
    offsets = transverse.azimuth_offsets(16)
    fast = transverse.azimuthal_resum(values, m, state, offsets, kind)
    x = state.gain_argument()
    W = (np.sinh(x) ** 2 if kind == "auto" else 0.5 * np.sinh(2 * x)).T
    direct = np.zeros(offsets.size)
    for j, d in enumerate(offsets):
        phase = np.exp(1j * m * d) + np.where(m > 0, np.exp(-1j * m * d), 0.0)
        direct[j] = np.sum(np.abs(W @ (values * phase)) ** 2)
    np.testing.assert_allclose(fast, direct, rtol=1e-8, atol=1e-8 * direct.max())


def test_farfield_intensity_independent_of_azimuth(reduced_analysis):
    modes = reduced_analysis.model.transverse
    st_ = reduced_analysis.model.state(1e-3, quasi_continuum=False)
    sub = modes.m <= 40
    small = type(modes)(modes.m[sub], modes.l[sub], modes.eigenvalues[sub], modes.signal[sub],
                        modes.idler[sub], modes.grid, modes.truncation_loss, modes.norm_t_perp)
    st_small = type(st_)(st_.perp[sub], st_.par, st_.coupling, st_.pump_power, st_.perp_weight[sub])
    maps = transverse.farfield_intensity_map(st_small, small, [0.0, 0.7, 2.0, math.pi])
    np.testing.assert_allclose(maps, maps[:, [0]] * np.ones((1, 4)), rtol=1e-10)
    np.testing.assert_allclose(maps[:, 0], transverse.farfield_intensity(st_small, small), rtol=1e-10)


def test_farfield_cuts_peak_where_expected(reduced_analysis):
    c = reduced_analysis.farfield_cuts(1e-7)
    n = c["A_s_phi"].coordinate.size
    # auto peaks at zero offset, cross at phi_s - phi_i = pi
    assert np.argmax(c["A_s_phi"].values) == n // 2
    assert np.argmax(c["C_s_phi"].values) == n // 2
    k = c["A_s_k"].coordinate
    assert abs(k[np.argmax(c["C_s_k"].values)] - c["C_s_k"].reference) < 0.02 * c["C_s_k"].reference
    assert reduced_analysis.model.transverse.grid.integrate(c["n_s_k"].values) == pytest.approx(
        float(k[reduced_analysis.k_ref]))


def test_nearfield_modes_at_origin(reduced_analysis):
    disc, _, _ = reduced_analysis.nearfield_modes()
    modes = reduced_analysis.model.transverse
    assert disc.radius_grid.nodes[0] == 0.0
    at0 = np.abs(disc.radial_modes[:, 0])
    assert np.all(at0[modes.m > 0] < 1e-12 * np.abs(disc.radial_modes).max())
    for l in range(3):
        j = np.nonzero((modes.m == 0) & (modes.l == l))[0][0]
        assert at0[j] > 0
    j = np.nonzero((modes.m == 0) & (modes.l == 0))[0][0]
    assert np.argmax(np.abs(disc.radial_modes[j])) == 0


def test_nearfield_parseval(reduced_analysis):
    disc, cut_s, _ = reduced_analysis.nearfield_modes()
    lam = reduced_analysis.model.transverse.eigenvalues
    assert disc.weighted_parseval_error(lam) < 1e-3


def test_azimuthal_width_at_origin_is_full_circle(reduced_analysis):
    disc, _, _ = reduced_analysis.nearfield_modes()
    modes = reduced_analysis.model.transverse
    off = reduced_analysis.offsets()
    for p in (1e-7, 2e-2):
        st_ = reduced_analysis.model.state(p, quasi_continuum=False)
        for cut in (transverse.nearfield_azimuthal_amplitude(st_, modes, disc, 0, off),
                    transverse.nearfield_azimuthal_autocorrelation(st_, modes, disc, 0, off)):
            assert fwhm(cut.coordinate, cut.values, period=2 * math.pi) == 2 * math.pi


def test_nearfield_flux_normalization(reduced_analysis):
    c = reduced_analysis.nearfield_cuts(1e-7)["I_s_r"]
    disc, _, _ = reduced_analysis.nearfield_modes()
    assert float(c.values @ disc.radius_grid.weights) == pytest.approx(0.5)


def test_streamed_low_gain_cut_matches_full_analysis(reduced_cfg, reduced_analysis):
    _, streamed, _ = pipeline.large_scale_transverse(reduced_cfg)
    full = reduced_analysis.nearfield_cuts(1e-7)["A_a_s_r"]
    ref = np.argmin(np.abs(full.coordinate - full.reference))
    np.testing.assert_allclose(streamed.values, full.values / full.values[ref], atol=1e-3)
