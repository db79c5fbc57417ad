import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from twinbeam.bessel import bessel_j, bessel_j_all, bessel_j_descending


@settings(max_examples=30, deadline=None)
@given(m_max=st.integers(0, 300), x_max=st.floats(0.0, 400.0))
def test_against_reference_implementation(m_max, x_max):
    x = np.linspace(0, x_max, 37)
    got = bessel_j_all(m_max, x)
    ref = special.jv(np.arange(m_max + 1)[:, None], x[None, :])
    np.testing.assert_allclose(got, ref, atol=1e-12)


def test_high_orders_and_arguments():
    x = np.array([10.0, 1000.0, 4000.0, 4400.0, 5000.0])
    m = np.array([0, 1, 500, 3999, 4383])
    got = bessel_j_all(4383, x)[m]
    np.testing.assert_allclose(got, special.jv(m[:, None], x[None, :]), atol=1e-12)


def test_small_argument_series():
    x = np.array([1e-300, 1e-200, 1e-12, 1e-8, 1e-4])
    for m in (0, 1, 5, 40):
        series = (x / 2) ** m / math.factorial(m) * (1 - (x / 2) ** 2 / (m + 1))
        np.testing.assert_allclose(bessel_j(m, x), series, rtol=1e-10, atol=1e-300)


def test_large_argument_asymptotics():
    x = np.array([2e4, 5e4])
    for m in (0, 3):
        chi = x - m * math.pi / 2 - math.pi / 4
        mu = 4 * m * m
        asym = np.sqrt(2 / (math.pi * x)) * (np.cos(chi) - (mu - 1) / (8 * x) * np.sin(chi))
        np.testing.assert_allclose(bessel_j(m, x), asym, atol=1e-11)


def test_descending_generator_matches():
    x = np.linspace(0, 50, 11)
    full = bessel_j_all(60, x)
    seen = []
    for m, v in bessel_j_descending(60, x):
        seen.append(m)
        np.testing.assert_allclose(v, full[m], atol=1e-15)
    assert seen == list(range(60, -1, -1))


def test_negative_arguments_rejected():
    with pytest.raises(ValueError):
        bessel_j(0, np.array([-1.0]))
