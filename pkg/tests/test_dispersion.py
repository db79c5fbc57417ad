import math

import numpy as np
import pytest

from twinbeam import dispersion


@pytest.fixture(scope="module")
def bbo():
    return dispersion.load_model("bbo_eimerl1987")


def test_ordinary_index_published_values(bbo):
    # BBO ordinary index near 1.6749 at 532 nm
    assert float(dispersion.refractive_index(bbo, 532e-9, "o")) == pytest.approx(1.6749, abs=2e-3)


def test_extraordinary_index_between_principal_values(bbo):
    n_o = float(dispersion.refractive_index(bbo, 349e-9, "o"))
    n_e = float(dispersion.refractive_index(bbo, 349e-9, "e", theta=math.pi / 2))
    mid = float(dispersion.refractive_index(bbo, 349e-9, "e", theta=math.radians(36)))
    assert n_e < mid < n_o


def test_out_of_range_wavelength_rejected(bbo):
    with pytest.raises(dispersion.DispersionRangeError):
        dispersion.refractive_index(bbo, 10e-6, "o")


def test_cut_angle_solver_inverts_geometry(bbo):
    target = math.radians(8.0)
    cut = dispersion.solve_cut_angle(bbo, 349e-9, 698e-9, 698e-9, target)
    ext = dispersion.emission_geometry(bbo, cut, 349e-9, 698e-9, 698e-9)[2]
    assert ext == pytest.approx(target, abs=1e-12)


def test_degenerate_angles_symmetric(bbo):
    a_s, a_i, e_s, e_i = dispersion.emission_geometry(bbo, math.radians(36.3), 349e-9, 698e-9, 698e-9)
    assert a_s == pytest.approx(a_i) and e_s == pytest.approx(e_i)


def test_no_phase_matching_reported(bbo):
    with pytest.raises(dispersion.PhaseMatchingError):
        dispersion.emission_geometry(bbo, math.radians(20), 349e-9, 698e-9, 698e-9)


def test_longitudinal_mismatch_vanishes_at_center(reference_cfg):
    o = dispersion.central_optics(reference_cfg)
    assert abs(o.longitudinal_mismatch(o.omega_s, o.omega_i)) < 1e-6 * o.k_p
    assert o.k_perp_s == pytest.approx(o.k_perp_i)
    assert np.isfinite(o.transverse_mismatch(o.k_perp_s, o.k_perp_i, math.pi))
