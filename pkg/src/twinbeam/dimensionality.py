"""Mode-count and entanglement-dimensionality quantifiers.

All participation ratios are invariant under a common rescaling of their weights, so
``V^2`` and ``U^2 V^2`` are evaluated relative to the strongest mode,
``exp(-2 x_top)`` and ``exp(-4 x_top)``, which keeps high gains finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .correlations import first_moment_width


class VacuumStateError(ValueError):
    pass


def participation_ratio(weights):
    """``(sum w)^2 / sum w^2`` of non-negative weights."""
    w = np.asarray(weights, dtype=float)
    s2 = float(np.sum(w * w))
    if not s2 > 0:
        raise VacuumStateError("all weights vanish")
    s = float(np.sum(w))
    return s * s / s2


def _scaled_terms(x, x_top):
    """``V^2 e^{-2 x_top}`` and ``U^2 V^2 e^{-4 x_top}`` for gain arguments ``x``."""
    v = 0.5 * (np.exp(x - x_top) - np.exp(-x - x_top))
    v2 = v * v
    # U^2 V^2 = sinh(2x)^2 / 4
    uv = 0.5 * (np.exp(2 * x - 2 * x_top) - np.exp(-2 * x - 2 * x_top)) * 0.5
    return v2, uv * uv


@dataclass(frozen=True, eq=False)
class GainQuantifiers:
    """Quantifiers that depend only on the gain state."""

    K: float
    K_omega: float
    K_kphi: float
    K_n: float
    K_n_omega: float
    K_n_kphi: float
    p_perp: np.ndarray
    p_par: np.ndarray


def gain_quantifiers(state, block=512):
    """Evaluate ``K``, ``K_omega``, ``K_kphi``, ``K_n`` and the averaged versions.

    Parameters
    ----------
    state : GainState
        ``perp_weight`` counts the transverse modes each entry represents.
    """
    x_top = state.top_gain
    if not x_top > 0:
        raise VacuumStateError("vacuum state: all gains vanish")
    w = state.perp_weight
    n_perp, n_par = state.perp.size, state.par.size
    row_v2 = np.zeros(n_perp)
    row_v4 = np.zeros(n_perp)
    row_y = np.zeros(n_perp)
    row_y2 = np.zeros(n_perp)
    col_v2 = np.zeros(n_par)
    col_v4 = np.zeros(n_par)
    col_y = np.zeros(n_par)
    col_y2 = np.zeros(n_par)
    for start in range(0, n_perp, block):
        sl = slice(start, start + block)
        v2, y = _scaled_terms(state.gain_argument(sl), x_top)
        ww = w[sl]
        row_v2[sl] = v2.sum(axis=1)
        row_v4[sl] = (v2 * v2).sum(axis=1)
        row_y[sl] = y.sum(axis=1)
        row_y2[sl] = (y * y).sum(axis=1)
        col_v2 += ww @ v2
        col_v4 += ww @ (v2 * v2)
        col_y += ww @ y
        col_y2 += ww @ (y * y)
    total_v2 = float(w @ row_v2)
    if not total_v2 > 0:
        raise VacuumStateError("vacuum state: no photons")
    K = float(w @ row_y) ** 2 / float(w @ row_y2)
    K_n = total_v2**2 / float(w @ row_v4)
    p_perp = w * row_v2 / total_v2
    p_par = col_v2 / total_v2
    ok = row_y2 > 0
    K_omega = float(np.sum(p_perp[ok] * row_y[ok] ** 2 / row_y2[ok]))
    ok_n = row_v4 > 0
    K_n_omega = float(np.sum(p_perp[ok_n] * row_v2[ok_n] ** 2 / row_v4[ok_n]))
    okc = col_y2 > 0
    K_kphi = float(np.sum(p_par[okc] * col_y[okc] ** 2 / col_y2[okc]))
    okc_n = col_v4 > 0
    K_n_kphi = float(np.sum(p_par[okc_n] * col_v2[okc_n] ** 2 / col_v4[okc_n]))
    return GainQuantifiers(K, K_omega, K_kphi, K_n, K_n_omega, K_n_kphi, p_perp, p_par)


def entanglement_dimensionality(state):
    return gain_quantifiers(state).K


def statistics_mode_count(state):
    q = gain_quantifiers(state)
    return q.K_n, q.K_n_omega


def width_ratio(intensity_width, amplitude_width):
    """``Delta n / Delta A^a``."""
    if not (intensity_width > 0 and amplitude_width > 0):
        raise ValueError("widths must be positive")
    return float(intensity_width) / float(amplitude_width)


def directional_counts(modes, weights=None):
    """Participation ratios of the azimuthal and radial marginals.

    Parameters
    ----------
    modes : TransverseModes
        ``m >= 0`` entries; ``-m`` partners are included with equal weight.
    weights : array_like, optional
        Weight of each entry's modes; defaults to ``lambda^2``.

    Returns
    -------
    (radial_count, azimuthal_count)
    """
    w = modes.eigenvalues**2 if weights is None else np.asarray(weights, dtype=float)
    m = modes.m
    mult = np.where(m == 0, 1.0, 2.0)
    m_vals = np.unique(m)
    w_m = np.zeros(m_vals.size)
    np.add.at(w_m, np.searchsorted(m_vals, m), w)
    # the -m partners repeat every m > 0 marginal
    az = np.concatenate([w_m[m_vals > 0], w_m])
    l_vals = np.unique(modes.l)
    w_l = np.zeros(l_vals.size)
    np.add.at(w_l, np.searchsorted(l_vals, modes.l), mult * w)
    return participation_ratio(w_l), participation_ratio(az)


def gain_weights(state):
    """Per-entry ``sum_q U^2 V^2`` (scaled), the low-gain limit of which is ``lambda^2``."""
    x_top = state.top_gain
    out = np.empty(state.perp.size)
    for start in range(0, state.perp.size, 512):
        sl = slice(start, start + 512)
        _, y = _scaled_terms(state.gain_argument(sl), x_top)
        out[sl] = y.sum(axis=1)
    return out


@dataclass(frozen=True, eq=False)
class DimensionalityReport:
    """All quantifiers at one pump power; width ratios are ``nan`` when not evaluated."""

    pump_power: float
    gain: float
    photon_number: float
    K: float
    K_omega: float
    K_kphi: float
    K_n: float
    K_n_omega: float
    K_n_kphi: float
    p_perp: np.ndarray
    p_par: np.ndarray
    K_delta_spectral: float = math.nan
    K_delta_temporal: float = math.nan
    K_delta_farfield: float = math.nan
    K_delta_nearfield: float = math.nan
    radial_count: float = math.nan
    azimuthal_count: float = math.nan
    widths: dict = field(default_factory=dict)

    def row(self):
        """Scalar columns for tabular export."""
        return {
            "P_p_watts": self.pump_power,
            "g": self.gain,
            "N_s": self.photon_number,
            "K": self.K,
            "K_omega": self.K_omega,
            "K_kphi": self.K_kphi,
            "K_n": self.K_n,
            "K_n_omega": self.K_n_omega,
            "K_n_kphi": self.K_n_kphi,
            "K_delta_spectral": self.K_delta_spectral,
            "K_delta_temporal": self.K_delta_temporal,
            "K_delta_farfield": self.K_delta_farfield,
            "K_delta_nearfield": self.K_delta_nearfield,
            "radial_count": self.radial_count,
            "azimuthal_count": self.azimuthal_count,
        }


def nearfield_width_ratio(intensity_fwhm, amplitude_cut):
    """``(Delta n_r / Delta~A^a_r)^2`` with the first-moment amplitude width."""
    width = first_moment_width(amplitude_cut.coordinate, amplitude_cut.values,
                               amplitude_cut.reference)
    return width_ratio(intensity_fwhm, width) ** 2
