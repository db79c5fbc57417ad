import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from twinbeam import kernels


@settings(max_examples=30, deadline=None)
@given(mismatch=st.floats(-2e4, 2e4), length=st.floats(1e-3, 2e-2))
def test_z_average_matches_quadrature(mismatch, length):
    re = integrate.quad(lambda z: math.cos(mismatch * z), 0, length, limit=400)[0]
    im = integrate.quad(lambda z: math.sin(mismatch * z), 0, length, limit=400)[0]
    got = kernels.z_average(mismatch, length)
    assert got == pytest.approx(complex(re, im) / length, abs=1e-9)


def test_sinc_at_zero_and_zeros():
    assert kernels.sinc(0.0) == 1.0
    assert abs(kernels.sinc(math.pi)) < 1e-16


def test_spectral_kernel_symmetric_at_degeneracy(reference_cfg):
    sk = kernels.build_spectral_kernel(reference_cfg)
    v = sk.values
    np.testing.assert_allclose(np.abs(v), np.abs(v.T), rtol=1e-8, atol=1e-12 * np.abs(v).max())
    # ridge of energy conservation along the anti-diagonal
    j = v.shape[0] // 2
    assert np.argmax(np.abs(v[j])) == j


def test_harmonic_orders_cover_the_kernel(reduced_cfg):
    setup = kernels.prepare_transverse(reduced_cfg)
    m = np.array([0, setup.m_max // 2, setup.m_max])
    e = kernels.harmonic_energies(setup, m)
    assert e[0] > e[1] > e[2]
    assert e[2] / e[0] < reduced_cfg.grids.tail_tolerance


def test_harmonic_truncation_detected():
    with pytest.raises(kernels.HarmonicTruncationError):
        kernels.check_harmonic_tail(0.5, 1.0)
