"""Run configuration: crystal, pump, emission geometry, grid and sweep settings.

Configuration files are INI-style text with sections ``[crystal]``, ``[pump]``,
``[geometry]``, ``[grids]`` and ``[sweep]``.  Lengths are in meters, powers in
watts and angles in degrees; everything is converted to SI radians on load.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import constants

C_LIGHT = constants.c
EPS0 = constants.epsilon_0
HBAR = constants.hbar

# FWHM of a Gaussian intensity spectrum exp(-tau^2 dw^2 / 2) is 2 sqrt(2 ln 2) / tau
_FWHM_FACTOR = 2.0 * math.sqrt(2.0 * math.log(2.0))


class ConfigError(ValueError):
    """Invalid or inconsistent configuration; ``key`` holds the offending key path."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class CrystalConfig:
    length_L: float
    cut_angle: float
    d_eff: float = 2.0e-12
    dispersion_id: str = "bbo_eimerl1987"

    def __post_init__(self):
        _positive("crystal.length_L", self.length_L)
        _positive("crystal.d_eff", self.d_eff)
        if not 0.0 < self.cut_angle < math.pi / 2:
            raise ConfigError("crystal.cut_angle", "must lie in (0, 90) degrees")


@dataclass(frozen=True)
class PumpConfig:
    center_wavelength: float
    spectral_width_fwhm: float
    beam_radius_wp: float
    power_Pp: float
    repetition_rate_f: float

    def __post_init__(self):
        for name in ("center_wavelength", "spectral_width_fwhm", "beam_radius_wp",
                     "power_Pp", "repetition_rate_f"):
            _positive(f"pump.{name}", getattr(self, name))

    @property
    def omega0(self):
        """Central pump angular frequency."""
        return 2.0 * math.pi * C_LIGHT / self.center_wavelength

    @property
    def spectral_width_omega(self):
        """FWHM of the pump intensity spectrum in rad/s."""
        return 2.0 * math.pi * C_LIGHT * self.spectral_width_fwhm / self.center_wavelength**2

    @property
    def duration_tau_p(self):
        """Pulse duration parameter of the Gaussian field amplitude."""
        return duration_from_width(self.spectral_width_fwhm, self.center_wavelength)

    def with_power(self, power):
        return dataclasses.replace(self, power_Pp=float(power))


@dataclass(frozen=True)
class GeometryConfig:
    """Central emission geometry; angles are measured from the pump axis.

    ``emission_angle_*`` are external (outside the crystal) and
    ``internal_angle_*`` the corresponding angles inside the crystal.
    """

    signal_center_wavelength: float
    idler_center_wavelength: float
    emission_angle_signal: float
    emission_angle_idler: float
    internal_angle_signal: float = 0.0
    internal_angle_idler: float = 0.0

    @property
    def omega_s(self):
        return 2.0 * math.pi * C_LIGHT / self.signal_center_wavelength

    @property
    def omega_i(self):
        return 2.0 * math.pi * C_LIGHT / self.idler_center_wavelength


@dataclass(frozen=True)
class GridConfig:
    """Discretization settings.

    Point counts of ``0`` select automatic sizing from the physical scales.
    Half-widths are given in natural units: the first zero of the phase-matching
    sinc along the kernel ridge.  Near-field extents are in pump beam radii, except
    ``nearfield_cut_halfwidth`` which counts periods ``2 pi / k_perp0`` of the
    emission-ring carrier around the reference radius ``nearfield_reference * w_p``.
    """

    spectral_points: int = 0
    spectral_halfwidth: float = 4.0
    radial_points: int = 0
    radial_halfwidth: float = 2.0
    panel_nodes: int = 9
    time_points: int = 0
    time_window: float = 6.0
    nearfield_points: int = 1024
    nearfield_extent: float = 3.0
    nearfield_cut_points: int = 1201
    nearfield_cut_halfwidth: float = 12.0
    nearfield_reference: float = 1.006
    m_max: int = 0
    lambda_cutoff: float = 1.0e-4
    spectral_cutoff: float = 1.0e-4
    density_bins: int = 200
    tail_tolerance: float = 1.0e-2
    grid_scale: float = 1.0

    def __post_init__(self):
        if self.panel_nodes < 1 or self.panel_nodes % 2 == 0:
            raise ConfigError("grids.panel_nodes", "must be a positive odd integer")
        for name in ("spectral_halfwidth", "radial_halfwidth", "time_window",
                     "nearfield_extent", "nearfield_cut_halfwidth", "nearfield_reference",
                     "lambda_cutoff", "spectral_cutoff",
                     "tail_tolerance", "grid_scale"):
            _positive(f"grids.{name}", getattr(self, name))
        for name in ("spectral_points", "radial_points", "time_points", "m_max"):
            if getattr(self, name) < 0:
                raise ConfigError(f"grids.{name}", "must be non-negative")
        for name in ("nearfield_points", "nearfield_cut_points"):
            if getattr(self, name) < 8:
                raise ConfigError(f"grids.{name}", "must be at least 8")
        if self.density_bins < 1:
            raise ConfigError("grids.density_bins", "must be positive")


@dataclass(frozen=True)
class SweepConfig:
    power_min: float = 1.0e-7
    power_max: float = 5.0e-2
    points: int = 20

    def __post_init__(self):
        _positive("sweep.power_min", self.power_min)
        if self.power_max <= self.power_min:
            raise ConfigError("sweep.power_max", "must exceed power_min")
        if self.points < 2:
            raise ConfigError("sweep.points", "need at least two points")

    def powers(self):
        return np.logspace(math.log10(self.power_min), math.log10(self.power_max), self.points)


@dataclass(frozen=True)
class RunConfig:
    crystal: CrystalConfig
    pump: PumpConfig
    geometry: GeometryConfig
    grids: GridConfig = field(default_factory=GridConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    cut_angle_auto: bool = False
    emission_angle_input: float | None = None

    def with_power(self, power):
        return dataclasses.replace(self, pump=self.pump.with_power(power))

    def with_grids(self, **changes):
        return dataclasses.replace(self, grids=dataclasses.replace(self.grids, **changes))

    def digest(self):
        """Short hash of the serialized configuration."""
        return hashlib.sha256(dump_config(self).encode()).hexdigest()[:16]


def duration_from_width(width_fwhm, center_wavelength):
    """Transform-limited duration parameter for a FWHM intensity bandwidth in meters."""
    domega = 2.0 * math.pi * C_LIGHT * width_fwhm / center_wavelength**2
    return _FWHM_FACTOR / domega


def width_from_duration(tau, center_wavelength):
    """Inverse of :func:`duration_from_width`."""
    domega = _FWHM_FACTOR / tau
    return domega * center_wavelength**2 / (2.0 * math.pi * C_LIGHT)


def pump_field_scale(pump, k_p):
    """Amplitude scale xi of the pump field for average power ``P`` and rate ``f``."""
    return math.sqrt(pump.power_Pp * pump.omega0 / (EPS0 * C_LIGHT**2 * k_p * pump.repetition_rate_f))


def pump_spectral_amplitude(omega, pump, k_p):
    """Gaussian pump spectral amplitude at angular frequency ``omega``.

    Parameters
    ----------
    omega : array_like
        Pump angular frequency in rad/s.
    pump : PumpConfig
    k_p : float
        Pump wave-vector magnitude at the central frequency (enters the field scale).
    """
    tau = pump.duration_tau_p
    xi = pump_field_scale(pump, k_p)
    omega = np.asarray(omega, dtype=float)
    return xi * math.sqrt(tau / math.sqrt(2.0 * math.pi)) * np.exp(-(tau * (omega - pump.omega0)) ** 2 / 4.0)


def pump_transverse_spectrum(k_perp, pump, vector=False):
    """Gaussian transverse profile of the pump.

    ``k_perp`` holds magnitudes, or 2-vectors along the last axis when ``vector`` is set.
    """
    k_perp = np.asarray(k_perp, dtype=float)
    k2 = np.sum(k_perp**2, axis=-1) if vector else k_perp**2
    w = pump.beam_radius_wp
    return w / math.sqrt(2.0 * math.pi) * np.exp(-(w**2) * k2 / 4.0)


# ---------------------------------------------------------------------------
# loading and serialization

_REQUIRED = {
    "crystal": ("length_L", "cut_angle"),
    "pump": ("center_wavelength", "spectral_width_fwhm", "beam_radius_wp", "power_Pp",
             "repetition_rate_f"),
    "geometry": ("signal_center_wavelength", "idler_center_wavelength"),
}


def _positive(key, value):
    if not (isinstance(value, (int, float, np.floating)) and math.isfinite(value) and value > 0):
        raise ConfigError(key, f"must be a positive finite number, got {value!r}")


def _number(parser, section, key, default=None):
    if not parser.has_option(section, key):
        if default is None:
            raise ConfigError(f"{section}.{key}", "missing key")
        return default
    raw = parser.get(section, key)
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}", f"not a number: {raw!r}") from None


def _integer(parser, section, key, default):
    value = _number(parser, section, key, float(default))
    if value != int(value):
        raise ConfigError(f"{section}.{key}", "must be an integer")
    return int(value)


def load_config(source):
    """Parse and validate configuration text.

    ``crystal.cut_angle`` may be ``auto``, in which case
    ``geometry.emission_angle_signal`` is required and the cut angle is solved
    from it.  Otherwise the emission angles are derived from the cut angle and,
    if also given, must agree with it.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(source)
    except configparser.Error as exc:
        raise ConfigError("<source>", f"parse error: {exc}") from None
    for section, keys in _REQUIRED.items():
        if not parser.has_section(section):
            raise ConfigError(section, "missing section")
        for key in keys:
            if not parser.has_option(section, key):
                raise ConfigError(f"{section}.{key}", "missing key")

    from . import dispersion

    cut_raw = parser.get("crystal", "cut_angle").strip().lower()
    cut_auto = cut_raw == "auto"
    length = _number(parser, "crystal", "length_L")
    d_eff = _number(parser, "crystal", "d_eff", 2.0e-12)
    disp_id = parser.get("crystal", "dispersion_id", fallback="bbo_eimerl1987").strip()
    pump = PumpConfig(
        center_wavelength=_number(parser, "pump", "center_wavelength"),
        spectral_width_fwhm=_number(parser, "pump", "spectral_width_fwhm"),
        beam_radius_wp=_number(parser, "pump", "beam_radius_wp"),
        power_Pp=_number(parser, "pump", "power_Pp"),
        repetition_rate_f=_number(parser, "pump", "repetition_rate_f"),
    )
    lam_s = _number(parser, "geometry", "signal_center_wavelength")
    lam_i = _number(parser, "geometry", "idler_center_wavelength")
    _positive("geometry.signal_center_wavelength", lam_s)
    _positive("geometry.idler_center_wavelength", lam_i)
    mismatch = abs(1.0 / lam_s + 1.0 / lam_i - 1.0 / pump.center_wavelength) * pump.center_wavelength
    if mismatch > 1e-12:
        raise ConfigError("geometry.idler_center_wavelength",
                          f"energy conservation violated (relative mismatch {mismatch:.3e})")
    given_angle = None
    if parser.has_option("geometry", "emission_angle_signal"):
        given_angle = math.radians(_number(parser, "geometry", "emission_angle_signal"))

    try:
        model = dispersion.load_model(disp_id)
    except KeyError:
        raise ConfigError("crystal.dispersion_id", f"unknown dispersion model {disp_id!r}") from None

    if cut_auto:
        if given_angle is None:
            raise ConfigError("geometry.emission_angle_signal",
                              "required when crystal.cut_angle = auto")
        try:
            cut = dispersion.solve_cut_angle(model, pump.center_wavelength, lam_s, lam_i, given_angle)
        except dispersion.PhaseMatchingError as exc:
            raise ConfigError("crystal.cut_angle", str(exc)) from None
    else:
        try:
            cut = math.radians(float(cut_raw))
        except ValueError:
            raise ConfigError("crystal.cut_angle", f"not a number: {cut_raw!r}") from None

    crystal = CrystalConfig(length_L=length, cut_angle=cut, d_eff=d_eff, dispersion_id=disp_id)
    placeholder = GeometryConfig(lam_s, lam_i, 0.0, 0.0)
    try:
        geometry = dispersion.central_geometry(crystal, pump, placeholder)
    except dispersion.PhaseMatchingError as exc:
        raise ConfigError("crystal.cut_angle", str(exc)) from None
    if given_angle is not None and not cut_auto:
        if abs(geometry.emission_angle_signal - given_angle) > math.radians(1e-3):
            raise ConfigError(
                "geometry.emission_angle_signal",
                "phase-matching inconsistency: cut angle gives "
                f"{math.degrees(geometry.emission_angle_signal):.4f} deg",
            )

    grids = _load_grids(parser)
    sweep = SweepConfig(
        power_min=_number(parser, "sweep", "power_min", SweepConfig.power_min),
        power_max=_number(parser, "sweep", "power_max", SweepConfig.power_max),
        points=_integer(parser, "sweep", "points", SweepConfig.points),
    ) if parser.has_section("sweep") else SweepConfig()
    return RunConfig(crystal, pump, geometry, grids, sweep,
                     cut_angle_auto=cut_auto, emission_angle_input=given_angle)


def _load_grids(parser):
    if not parser.has_section("grids"):
        return GridConfig()
    defaults = GridConfig()
    values = {}
    for f in dataclasses.fields(GridConfig):
        default = getattr(defaults, f.name)
        if isinstance(default, int):
            values[f.name] = _integer(parser, "grids", f.name, default)
        else:
            values[f.name] = _number(parser, "grids", f.name, default)
    unknown = set(parser.options("grids")) - set(values)
    if unknown:
        raise ConfigError(f"grids.{sorted(unknown)[0]}", "unknown key")
    return GridConfig(**values)


def load_config_file(path):
    with open(path, encoding="utf-8") as fh:
        return load_config(fh.read())


def _degrees_exact(rad):
    """Decimal degree string that converts back to exactly ``rad``."""
    deg = math.degrees(rad)
    for _ in range(64):
        if math.radians(float(repr(deg))) == rad:
            return repr(deg)
        deg = np.nextafter(deg, math.inf if math.radians(deg) < rad else -math.inf)
    return repr(math.degrees(rad))


def dump_config(cfg):
    """Serialize a RunConfig back to configuration text (round-trips exactly)."""
    c, p, g = cfg.crystal, cfg.pump, cfg.geometry
    lines = ["[crystal]",
             f"length_L = {c.length_L!r}",
             "cut_angle = " + ("auto" if cfg.cut_angle_auto else _degrees_exact(c.cut_angle)),
             f"d_eff = {c.d_eff!r}",
             f"dispersion_id = {c.dispersion_id}",
             "", "[pump]"]
    for name in ("center_wavelength", "spectral_width_fwhm", "beam_radius_wp", "power_Pp",
                 "repetition_rate_f"):
        lines.append(f"{name} = {getattr(p, name)!r}")
    lines += ["", "[geometry]",
              f"signal_center_wavelength = {g.signal_center_wavelength!r}",
              f"idler_center_wavelength = {g.idler_center_wavelength!r}"]
    if cfg.emission_angle_input is not None:
        lines.append("emission_angle_signal = " + _degrees_exact(cfg.emission_angle_input))
    lines += ["", "[grids]"]
    for f in dataclasses.fields(GridConfig):
        lines.append(f"{f.name} = {getattr(cfg.grids, f.name)!r}")
    lines += ["", "[sweep]",
              f"power_min = {cfg.sweep.power_min!r}",
              f"power_max = {cfg.sweep.power_max!r}",
              f"points = {cfg.sweep.points!r}", ""]
    return "\n".join(lines)
