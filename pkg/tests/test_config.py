import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twinbeam import config
from twinbeam.configs import names, path

BASE = path("reference.ini").read_text()


def test_shipped_configs_load():
    assert set(names()) >= {"reference.ini", "reduced_waist.ini"}
    for name in names():
        cfg = config.load_config_file(path(name))
        assert cfg.crystal.length_L == 8e-3


def test_dump_round_trips(reference_cfg):
    again = config.load_config(config.dump_config(reference_cfg))
    assert again == reference_cfg
    assert again.digest() == reference_cfg.digest()


@settings(max_examples=25, deadline=None)
@given(length=st.floats(1e-3, 2e-2), radius=st.floats(5e-5, 2e-3), power=st.floats(1e-8, 1.0),
       scale=st.floats(0.25, 4.0))
def test_round_trip_random_values(length, radius, power, scale):
    text = (BASE.replace("length_L = 8e-3", f"length_L = {length!r}")
            .replace("beam_radius_wp = 1e-3", f"beam_radius_wp = {radius!r}")
            .replace("power_Pp = 5e-4", f"power_Pp = {power!r}"))
    text += f"\n[grids]\ngrid_scale = {scale!r}\n"
    cfg = config.load_config(text)
    assert cfg.crystal.length_L == length
    assert cfg.grids.grid_scale == scale
    assert config.load_config(config.dump_config(cfg)) == cfg


@pytest.mark.parametrize("old,new,key", [
    ("length_L = 8e-3", "length_L = -1", "crystal.length_L"),
    ("idler_center_wavelength = 698e-9", "idler_center_wavelength = 700e-9",
     "geometry.idler_center_wavelength"),
    ("dispersion_id = bbo_eimerl1987", "dispersion_id = nonsense", "crystal.dispersion_id"),
    ("power_Pp = 5e-4", "", "pump.power_Pp"),
    ("emission_angle_signal = 8.45", "", "geometry.emission_angle_signal"),
    ("emission_angle_signal = 8.45", "emission_angle_signal = 80", "crystal.cut_angle"),
])
def test_invalid_configs_name_the_key(old, new, key):
    with pytest.raises(config.ConfigError) as info:
        config.load_config(BASE.replace(old, new))
    assert info.value.key == key


def test_unknown_grid_key():
    with pytest.raises(config.ConfigError):
        config.load_config(BASE + "\n[grids]\nspectral_pointz = 10\n")


def test_explicit_cut_angle_must_match_emission_angle(reference_cfg):
    deg = math.degrees(reference_cfg.crystal.cut_angle)
    ok = BASE.replace("cut_angle = auto", f"cut_angle = {deg!r}")
    assert config.load_config(ok).crystal.cut_angle == pytest.approx(reference_cfg.crystal.cut_angle)
    with pytest.raises(config.ConfigError):
        config.load_config(ok.replace("emission_angle_signal = 8.45", "emission_angle_signal = 8.6"))


def test_pulse_duration_width_inverse():
    tau = config.duration_from_width(0.1e-9, 349e-9)
    assert config.width_from_duration(tau, 349e-9) == pytest.approx(0.1e-9, rel=1e-12)
