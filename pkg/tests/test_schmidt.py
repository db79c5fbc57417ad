import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twinbeam import schmidt
from twinbeam.grids import build_grid

from oracles import hermite_functions, mehler_eigenvalues, mehler_kernel


@settings(max_examples=10, deadline=None)
@given(t=st.floats(0.05, 0.8))
def test_mehler_ladder(t):
    g, k = mehler_kernel(t)
    d = schmidt.decompose(k, g, g)
    np.testing.assert_allclose(d.eigenvalues[:8], mehler_eigenvalues(t, 8), rtol=1e-6, atol=1e-14)


def test_mehler_modes_hermite_gauss():
    g, k = mehler_kernel(0.5)
    d = schmidt.decompose(k, g, g)
    ref = hermite_functions(10, g.nodes)
    for n in range(10):
        f = d.signal_modes[n]
        f = f * np.sign(np.real(np.vdot(ref[n] * g.weights, f)))
        assert np.max(np.abs(f - ref[n])) < 1e-4
        # idler carries the conjugate phase
        assert np.max(np.abs(d.signal_modes[n] * d.idler_modes[n] - ref[n] ** 2)) < 1e-4


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), rank=st.integers(1, 6))
def test_reconstruction_and_orthonormality(seed, rank):
    rng = np.random.default_rng(seed)
    g = build_grid("frequency", (0.0, 1.0), 40)
    a = rng.normal(size=(40, rank)) + 1j * rng.normal(size=(40, rank))
    b = rng.normal(size=(rank, 40)) + 1j * rng.normal(size=(rank, 40))
    k = a @ b
    d = schmidt.decompose(k, g, g, cutoff=1e-10)
    assert d.eigenvalues.size == rank
    np.testing.assert_allclose(d.scale * d.reconstruct(), k, atol=1e-9 * np.abs(k).max())
    gram = (d.signal_modes.conj() * g.weights) @ d.signal_modes.T
    np.testing.assert_allclose(gram, np.eye(rank), atol=1e-10)
    assert np.sum(d.eigenvalues**2) == pytest.approx(1.0)


def test_keep_count_keeps_ties():
    v = np.array([1.0, 0.5, 0.5, 0.5, 0.1])
    assert schmidt.keep_count(v, 0.5) == 4
    assert schmidt.keep_count(v, 0.6) == 1


def test_density_preserves_counts_and_moments():
    rng = np.random.default_rng(1)
    lam = rng.uniform(0, 1, 1000)
    mult = np.where(rng.uniform(size=1000) < 0.5, 1, 2)
    d = schmidt.eigenvalue_density(lam, mult, bins=50)
    assert d.total_mode_count == mult.sum()
    assert d.integrate(lambda x: np.ones_like(x)) == pytest.approx(mult.sum())
    assert d.integrate(lambda x: x) == pytest.approx(np.sum(mult * lam))


def test_zero_kernel_rejected():
    g = build_grid("frequency", (0.0, 1.0), 10)
    with pytest.raises(FloatingPointError):
        schmidt.decompose(np.zeros((10, 10)), g, g)
