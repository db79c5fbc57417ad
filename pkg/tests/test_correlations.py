import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twinbeam.correlations import Cut, auto_sum, cross_sum, first_moment_width, fwhm


@settings(max_examples=30, deadline=None)
@given(sigma=st.floats(0.05, 2.0), center=st.floats(-1, 1))
def test_gaussian_fwhm(sigma, center):
    x = np.linspace(-15, 15, 30001)
    y = np.exp(-((x - center) ** 2) / (2 * sigma**2))
    assert fwhm(x, y) == pytest.approx(2 * math.sqrt(2 * math.log(2)) * sigma, rel=1e-4)


@settings(max_examples=30, deadline=None)
@given(h=st.floats(0.1, 3.0), ref=st.floats(-1, 1))
def test_first_moment_of_rectangle(h, ref):
    # a rectangle extending h beyond the reference has width h
    x = np.linspace(ref - 5, ref + 5, 200001)
    y = np.where(np.abs(x - ref) <= h, 1.0, 0.0)
    assert first_moment_width(x, y, ref) == pytest.approx(h, rel=1e-3)


def test_first_moment_of_exponential():
    x = np.linspace(0, 60, 600001)
    assert first_moment_width(x, np.exp(-x / 3.0), 0.0) == pytest.approx(6.0, rel=1e-6)


def test_origin_symmetric_and_periodic():
    r = np.linspace(0, 5, 5001)
    assert fwhm(r, np.exp(-r * r), origin_symmetric=True) == pytest.approx(
        2 * math.sqrt(math.log(2)), rel=1e-5)
    phi = np.linspace(-math.pi, math.pi, 64, endpoint=False)
    assert fwhm(phi, np.ones(64), period=2 * math.pi) == 2 * math.pi


def test_anchored_fwhm_ignores_distant_maximum():
    x = np.linspace(-10, 10, 20001)
    y = np.exp(-x**2 / 2) + 3 * np.exp(-((x - 7) ** 2) / 0.02)
    c = Cut(x, y, 0.0)
    assert c.fwhm(anchored=True) == pytest.approx(2 * math.sqrt(2 * math.log(2)), rel=1e-3)
    assert c.fwhm() < 0.5


def test_bilinear_sums_against_loops():
    rng = np.random.default_rng(0)
    F = rng.normal(size=(6, 4)) + 1j * rng.normal(size=(6, 4))
    G = rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3))
    W = rng.uniform(size=(5, 6))
    w = rng.uniform(size=5)
    a = auto_sum(F, G, [(w, W)])
    c = cross_sum(F, G, [(w, W)])
    for x in range(4):
        for y in range(3):
            amp = W @ (np.conj(F[:, x]) * G[:, y])
            assert a[x, y] == pytest.approx(w @ np.abs(amp) ** 2)
            amp = W @ (F[:, x] * G[:, y])
            assert c[x, y] == pytest.approx(w @ np.abs(amp) ** 2)
