"""Temporal Schmidt modes, photon flux and temporal correlations.

Temporal modes are Fourier transforms of the spectral modes with a ``sqrt(omega)``
weight, evaluated by quadrature of the panel-wise Gauss-Legendre interpolant of
each spectral mode.
Time is measured from the pump-pulse peak; the carrier ``exp(-i w0 t)`` is removed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .config import HBAR
from .correlations import Cut, amplitude_sum
from .gain import mode_photon_numbers
from .grids import QuadratureGrid, build_grid, refined_transform


class TimeWindowError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class TemporalModeSet:
    """``modes[q]`` samples the temporal mode ``q`` on ``time_grid``.

    With the ``photon`` convention ``int |f_q(t)|^2 dt = int (w / w0) |f_q(w)|^2 dw``,
    close to one, so that time integrals of fluxes count photons.  The ``field``
    convention multiplies by ``sqrt(hbar w0)``.
    """

    modes: np.ndarray
    time_grid: QuadratureGrid
    norm_convention: str
    omega_ref: float
    captured: np.ndarray

    def orthogonality_error(self):
        gram = (np.conj(self.modes) * self.time_grid.weights) @ self.modes.T
        d = np.sqrt(np.real(np.diag(gram)))
        return float(np.max(np.abs(gram / np.outer(d, d) - np.eye(d.size))))


def default_time_grid(cfg, decomp):
    """Uniform grid over ``+- time_window`` pump durations, never coarser than Nyquist."""
    tau = cfg.pump.duration_tau_p
    half = cfg.grids.time_window * tau
    span = decomp.grid_s.nodes[-1] - decomp.grid_s.nodes[0]
    # node spacing at the Nyquist limit of the spectral window; coarser grids alias
    nyquist = int(math.ceil(2 * half / (2 * math.pi / span))) + 1
    n = cfg.grids.time_points or nyquist
    n = max(int(n * cfg.grids.grid_scale), nyquist, 16)
    return build_grid("time", (-half, half), n)


def fourier_matrix(grid, omega_ref, times, convention="photon"):
    """Quadrature matrix mapping spectral samples on ``grid`` to temporal samples.

    Integrates the panel-wise polynomial interpolant of the spectral samples, so
    times far beyond ``pi / node spacing`` are not aliased.
    """
    if convention == "field":
        scale = math.sqrt(HBAR * omega_ref)
    elif convention == "photon":
        scale = 1.0
    else:
        raise ValueError(f"unknown convention {convention!r}")
    times = np.asarray(times, dtype=float)

    def kernel(omega):
        amp = scale * np.sqrt(omega / omega_ref) / math.sqrt(2 * math.pi)
        return amp[:, None] * np.exp(-1j * np.outer(omega - omega_ref, times))

    return refined_transform(grid, kernel, max_phase_rate=float(np.max(np.abs(times))))


def temporal_modes(decomp, time_grid, which="signal", convention="photon", tolerance=1e-3):
    """Transform the spectral modes to the time domain.

    Raises TimeWindowError when the eigenvalue-weighted mismatch between the mode
    energy in the window and its spectral value exceeds ``tolerance`` (energy lost
    outside the window or gained by an under-resolved transform).
    """
    grid = decomp.grid_s if which == "signal" else decomp.grid_i
    f = decomp.signal_modes if which == "signal" else decomp.idler_modes
    omega_ref = float(grid.nodes[grid.nodes.size // 2])
    mat = fourier_matrix(grid, omega_ref, time_grid.nodes, convention)
    modes = f @ mat
    expected = (np.abs(f) ** 2 * (grid.nodes / omega_ref)) @ grid.weights
    if convention == "field":
        expected = expected * HBAR * omega_ref
    captured = (np.abs(modes) ** 2) @ time_grid.weights / expected
    lam2 = decomp.eigenvalues**2
    missing = float(np.sum(lam2 * np.abs(1 - captured)) / np.sum(lam2))
    if missing > tolerance:
        raise TimeWindowError(f"time window misses {missing:.2e} of the mode energy")
    return TemporalModeSet(modes, time_grid, convention, omega_ref, captured)


def photon_flux(state, tmodes):
    """``I(t) = sum_ml sum_q |f_q(t)|^2 V^2``."""
    return mode_photon_numbers(state) @ (np.abs(tmodes.modes) ** 2)


def flux_cut(state, tmodes):
    t = tmodes.time_grid.nodes
    return Cut(t, photon_flux(state, tmodes), float("nan"), "I_s_t")


def peak_index(values):
    return int(np.argmax(values))


def temporal_autocorrelation(state, tmodes, rows=None, cols=None):
    s = spectral.intensity_autocorrelation(state, None, rows, cols, modes=tmodes.modes,
                                           domain="temporal")
    return _with_axes(s, tmodes, tmodes, rows, cols)


def temporal_crosscorrelation(state, signal_modes, idler_modes, rows=None, cols=None):
    s = spectral.intensity_crosscorrelation(state, None, rows, cols,
                                            modes=(signal_modes.modes, idler_modes.modes),
                                            domain="temporal")
    return _with_axes(s, signal_modes, idler_modes, rows, cols)


def _with_axes(surface, a, b, rows, cols):
    t1 = a.time_grid.nodes if rows is None else a.time_grid.nodes[np.atleast_1d(rows)]
    t2 = b.time_grid.nodes if cols is None else b.time_grid.nodes[np.atleast_1d(cols)]
    return type(surface)(surface.values, t1, t2, ("time", "time"), "temporal", "raw", surface.name)


def autocorrelation_cut(state, tmodes, ref):
    values = temporal_autocorrelation(state, tmodes, cols=ref).values[:, 0]
    t = tmodes.time_grid.nodes
    return Cut(t, values, float(t[ref]), "A_s_t")


def crosscorrelation_cut(state, signal_modes, idler_modes, ref_idler):
    values = temporal_crosscorrelation(state, signal_modes, idler_modes, cols=ref_idler).values[:, 0]
    t = signal_modes.time_grid.nodes
    return Cut(t, values, float(idler_modes.time_grid.nodes[ref_idler]), "C_t")


def amplitude_cut(state, tmodes, ref):
    values = amplitude_sum(tmodes.modes, tmodes.modes[:, [ref]], mode_photon_numbers(state))[:, 0]
    t = tmodes.time_grid.nodes
    return Cut(t, np.abs(values), float(t[ref]), "A_a_s_t")
