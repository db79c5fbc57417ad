"""Refractive indices, wave vectors, central emission geometry and phase mismatches.

Type-I (e -> o + o) interaction in a uniaxial crystal: the pump is extraordinary at
the cut angle, signal and idler are ordinary.  Coefficient sets are stored as JSON
files in ``twinbeam/data`` and selected by ``dispersion_id``.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy import optimize

from .config import C_LIGHT


class PhaseMatchingError(ValueError):
    pass


class DispersionRangeError(ValueError):
    pass


@dataclass(frozen=True)
class SellmeierSet:
    """``n^2 = A + B / (lam^2 - C) - D lam^2`` with ``lam`` in micrometers."""

    A: float
    B: float
    C: float
    D: float

    def n_squared(self, lam_um):
        lam2 = lam_um * lam_um
        return self.A + self.B / (lam2 - self.C) - self.D * lam2


@dataclass(frozen=True)
class DispersionModel:
    name: str
    sellmeier_ordinary: SellmeierSet
    sellmeier_extraordinary: SellmeierSet
    valid_range: tuple
    version: int = 1

    def check_range(self, wavelength):
        lo, hi = self.valid_range
        wl = np.asarray(wavelength)
        if np.any(wl < lo) or np.any(wl > hi):
            raise DispersionRangeError(
                f"wavelength outside valid range [{lo:.3e}, {hi:.3e}] m of {self.name}")


def available_models():
    files = resources.files("twinbeam").joinpath("data")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


@functools.lru_cache(maxsize=None)
def load_model(dispersion_id):
    """Load a coefficient set by id (file stem under ``twinbeam/data``)."""
    path = resources.files("twinbeam").joinpath("data", f"{dispersion_id}.json")
    if not path.is_file():
        raise KeyError(dispersion_id)
    raw = json.loads(path.read_text(encoding="utf-8"))
    lo, hi = raw["valid_range_um"]
    return DispersionModel(
        name=raw["id"],
        sellmeier_ordinary=SellmeierSet(**raw["ordinary"]),
        sellmeier_extraordinary=SellmeierSet(**raw["extraordinary"]),
        valid_range=(lo * 1e-6, hi * 1e-6),
        version=int(raw["version"]),
    )


def refractive_index(model, wavelength, polarization, theta=None):
    """Refractive index at ``wavelength`` (meters).

    Parameters
    ----------
    polarization : {"o", "e"}
        Ordinary, or extraordinary.  For ``"e"`` with ``theta`` given, the index of
        the extraordinary wave propagating at ``theta`` to the optic axis;
        without ``theta`` the principal extraordinary index.
    """
    model.check_range(wavelength)
    lam_um = np.asarray(wavelength, dtype=float) * 1e6
    n_o2 = model.sellmeier_ordinary.n_squared(lam_um)
    if polarization == "o":
        return np.sqrt(n_o2)
    if polarization != "e":
        raise ValueError(f"unknown polarization {polarization!r}")
    n_e2 = model.sellmeier_extraordinary.n_squared(lam_um)
    if theta is None:
        return np.sqrt(n_e2)
    c, s = math.cos(theta), math.sin(theta)
    return 1.0 / np.sqrt(c * c / n_o2 + s * s / n_e2)


def wavevector_magnitude(omega, field, model, cut_angle):
    """``n(omega) omega / c`` for ``field`` in {pump, signal, idler}."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("angular frequency must be positive")
    wavelength = 2.0 * math.pi * C_LIGHT / omega
    if field == "pump":
        n = refractive_index(model, wavelength, "e", cut_angle)
    elif field in ("signal", "idler"):
        n = refractive_index(model, wavelength, "o")
    else:
        raise ValueError(f"unknown field {field!r}")
    return n * omega / C_LIGHT


def internal_angles(k_p, k_s, k_i):
    """Angles of signal and idler to the pump for a closed wave-vector triangle.

    Solves ``k_s sin a_s = k_i sin a_i`` and ``k_p = k_s cos a_s + k_i cos a_i``.
    """
    if not (abs(k_s - k_i) <= k_p <= k_s + k_i):
        raise PhaseMatchingError("wave vectors do not close a triangle: no phase-matching solution")
    cos_s = (k_p * k_p + k_s * k_s - k_i * k_i) / (2.0 * k_p * k_s)
    cos_i = (k_p * k_p + k_i * k_i - k_s * k_s) / (2.0 * k_p * k_i)
    return math.acos(min(1.0, cos_s)), math.acos(min(1.0, cos_i))


def external_angle(internal, n):
    """Refraction at an output face normal to the pump axis."""
    s = n * math.sin(internal)
    if s >= 1.0:
        raise PhaseMatchingError("total internal reflection at the output face")
    return math.asin(s)


def _geometry(model, cut_angle, lam_p, lam_s, lam_i):
    w = [2.0 * math.pi * C_LIGHT / lam for lam in (lam_p, lam_s, lam_i)]
    k_p = float(wavevector_magnitude(w[0], "pump", model, cut_angle))
    k_s = float(wavevector_magnitude(w[1], "signal", model, cut_angle))
    k_i = float(wavevector_magnitude(w[2], "idler", model, cut_angle))
    a_s, a_i = internal_angles(k_p, k_s, k_i)
    n_s = float(refractive_index(model, lam_s, "o"))
    n_i = float(refractive_index(model, lam_i, "o"))
    return a_s, a_i, external_angle(a_s, n_s), external_angle(a_i, n_i)


def central_geometry(crystal, pump, geometry):
    """Emission angles at the central wavelengths for the configured cut angle.

    Returns a new GeometryConfig with internal and external angles filled in.
    """
    model = load_model(crystal.dispersion_id)
    a_s, a_i, e_s, e_i = _geometry(model, crystal.cut_angle, pump.center_wavelength,
                                   geometry.signal_center_wavelength,
                                   geometry.idler_center_wavelength)
    return dataclasses.replace(geometry, emission_angle_signal=e_s, emission_angle_idler=e_i,
                               internal_angle_signal=a_s, internal_angle_idler=a_i)


def solve_cut_angle(model, lam_p, lam_s, lam_i, emission_angle_signal):
    """Cut angle that produces the requested external signal emission angle."""

    def residual(theta):
        try:
            return _geometry(model, theta, lam_p, lam_s, lam_i)[2] - emission_angle_signal
        except PhaseMatchingError:
            return -emission_angle_signal

    scan = np.radians(np.linspace(0.1, 89.9, 1799))
    values = np.array([residual(t) for t in scan])
    change = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]
    if change.size == 0:
        raise PhaseMatchingError("no cut angle in scan range reaches the requested emission angle")
    j = change[0]
    return optimize.brentq(residual, scan[j], scan[j + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class CentralOptics:
    """Dispersion and geometry constants for one configuration.

    The paraxial non-collinear substitution is applied here once:
    ``cos_s``/``cos_i`` scale the longitudinal components and ``k_perp_s``/``k_perp_i``
    are the radial wave-vector magnitudes of the central emission directions.
    """

    model: DispersionModel
    cut_angle: float
    omega_p: float
    omega_s: float
    omega_i: float
    k_p: float
    k_s: float
    k_i: float
    theta_s: float
    theta_i: float

    @property
    def cos_s(self):
        return math.cos(self.theta_s)

    @property
    def cos_i(self):
        return math.cos(self.theta_i)

    @property
    def k_perp_s(self):
        return self.k_s * math.sin(self.theta_s)

    @property
    def k_perp_i(self):
        return self.k_i * math.sin(self.theta_i)

    def k(self, omega, field):
        return wavevector_magnitude(omega, field, self.model, self.cut_angle)

    def longitudinal_mismatch(self, omega_s, omega_i):
        """``k_p(w_s + w_i) - k_s(w_s) cos t_s - k_i(w_i) cos t_i``; broadcasts."""
        omega_s = np.asarray(omega_s, dtype=float)
        omega_i = np.asarray(omega_i, dtype=float)
        return (self.k(omega_s + omega_i, "pump") - self.k(omega_s, "signal") * self.cos_s
                - self.k(omega_i, "idler") * self.cos_i)

    def transverse_mismatch(self, k_s_perp, k_i_perp, delta_phi):
        """Paraxial transverse mismatch at the central frequencies; broadcasts.

        ``k_*_perp`` are radial wave-vector magnitudes and ``delta_phi`` the azimuth
        difference between signal and idler.  The pump term uses the magnitude of
        the vector sum; signal and idler terms use the radial deviation from the
        central emission ring, rescaled by the non-collinear substitution.
        """
        ks = np.asarray(k_s_perp, dtype=float)
        ki = np.asarray(k_i_perp, dtype=float)
        kp2 = ks * ks + ki * ki + 2.0 * ks * ki * np.cos(delta_phi)
        ds = ks - self.k_perp_s
        di = ki - self.k_perp_i
        c3s = self.cos_s**3
        c3i = self.cos_i**3
        return kp2 / (2.0 * self.k_p) - c3s * ds * ds / (2.0 * self.k_s) - c3i * di * di / (2.0 * self.k_i)


def central_optics(cfg):
    """CentralOptics for a RunConfig."""
    model = load_model(cfg.crystal.dispersion_id)
    g = cfg.geometry
    omega_p = cfg.pump.omega0
    omega_s, omega_i = g.omega_s, g.omega_i
    cut = cfg.crystal.cut_angle
    return CentralOptics(
        model=model,
        cut_angle=cut,
        omega_p=omega_p,
        omega_s=omega_s,
        omega_i=omega_i,
        k_p=float(wavevector_magnitude(omega_p, "pump", model, cut)),
        k_s=float(wavevector_magnitude(omega_s, "signal", model, cut)),
        k_i=float(wavevector_magnitude(omega_i, "idler", model, cut)),
        theta_s=g.internal_angle_signal,
        theta_i=g.internal_angle_idler,
    )


def emission_geometry(model, cut_angle, lam_p, lam_s, lam_i):
    """Internal and external emission angles ``(int_s, int_i, ext_s, ext_i)`` in radians."""
    return _geometry(model, cut_angle, lam_p, lam_s, lam_i)

