"""Bilinear correlation sums shared by the spectral, temporal and transverse domains.

Every correlation function has the form

    A(x, y) = sum_o w_o | sum_i conj(F_i(x)) F_i(y) W_oi |^2
    C(x, y) = sum_o w_o | sum_i F_i(x) G_i(y) W_oi |^2

where ``i`` runs over the mode index that is summed coherently and ``o`` over the
index that is summed in intensity.  ``W`` holds ``V^2`` (auto) or ``U V`` (cross).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .gain import GainRangeError

NORMALIZATION_TAGS = ("raw", "peak_normalized", "measure_normalized")
DOMAIN_TAGS = ("spectral", "temporal", "far_field_radial", "far_field_azimuthal",
               "near_field_radial", "near_field_azimuthal")


@dataclass(frozen=True, eq=False)
class CorrelationSurface:
    """Sampled 2D correlation function with axis metadata."""

    values: np.ndarray
    axis1: np.ndarray
    axis2: np.ndarray
    axis_kinds: tuple
    domain_tag: str
    normalization_tag: str = "raw"
    name: str = ""

    def __post_init__(self):
        if self.normalization_tag not in NORMALIZATION_TAGS:
            raise ValueError(f"unknown normalization tag {self.normalization_tag!r}")
        if self.domain_tag not in DOMAIN_TAGS:
            raise ValueError(f"unknown domain tag {self.domain_tag!r}")

    def peak_normalized(self):
        peak = float(np.max(self.values))
        return CorrelationSurface(self.values / peak, self.axis1, self.axis2, self.axis_kinds,
                                  self.domain_tag, "peak_normalized", self.name)


@dataclass(frozen=True, eq=False)
class Cut:
    """1D cut ``values(coordinate)`` through ``reference``."""

    coordinate: np.ndarray
    values: np.ndarray
    reference: float
    name: str = ""
    meta: dict = field(default_factory=dict)

    def normalized(self):
        return Cut(self.coordinate, self.values / np.max(np.abs(self.values)), self.reference,
                   self.name, self.meta)

    def fwhm(self, anchored=False, **kw):
        """FWHM of ``|values|``; ``anchored`` measures the lobe around ``reference``."""
        if anchored:
            kw["peak_index"] = int(np.argmin(np.abs(self.coordinate - self.reference)))
        return fwhm(self.coordinate, np.abs(self.values), **kw)


def fwhm(x, y, origin_symmetric=False, period=None, peak_index=None):
    """Full width at half maximum by linear interpolation around the peak.

    The peak is the global maximum unless ``peak_index`` fixes it (correlation cuts
    normalized at their reference point).  A side that never drops below half
    maximum extends to the end of the sampled range.  With ``origin_symmetric`` a
    profile on ``x >= 0`` peaking at ``x = 0`` is treated as even (width
    ``2 x_half``).  With ``period`` set, a cut that stays above half maximum
    everywhere has the full period as width.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    j = int(np.argmax(y)) if peak_index is None else int(peak_index)
    half = 0.5 * y[j]
    if half <= 0:
        raise ValueError("zero-width profile: peak is not positive")
    if period is not None and np.all(y >= half):
        return float(period)

    def crossing(indices):
        prev = j
        for k in indices:
            if y[k] < half:
                t = (y[prev] - half) / (y[prev] - y[k])
                return x[prev] + t * (x[k] - x[prev])
            prev = k
        return x[prev]

    right = crossing(range(j + 1, x.size))
    if origin_symmetric and j == 0 and x[0] == 0.0:
        return float(2 * right)
    left = crossing(range(j - 1, -1, -1))
    return float(right - left)


def first_moment_width(x, y, x_ref):
    """``2 int (x - x_ref) y dx / int y dx`` over ``x >= x_ref`` (trapezoid rule)."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y))
    sel = x >= x_ref
    xs, ys = x[sel], y[sel]
    if xs.size < 2:
        raise ValueError("cut has no support beyond the reference point")
    mass = trapezoid(ys, xs)
    if not mass > 0:
        raise ValueError("zero-mass cut")
    return float(2 * trapezoid((xs - x_ref) * ys, xs) / mass)


def auto_sum(F_rows, F_cols, blocks, coeff=None):
    """``sum_o w_o |sum_i conj(F_rows[i, x]) F_cols[i, y] W[o, i]|^2``.

    ``blocks`` yields ``(w, W)`` with ``W`` of shape ``(n_o, n_i)``; ``coeff`` is an
    optional per-``i`` factor folded into ``W``.
    """
    return _bilinear(np.conj(F_rows), F_cols, blocks, coeff)


def cross_sum(F_rows, G_cols, blocks, coeff=None):
    """``sum_o w_o |sum_i F_rows[i, x] G_cols[i, y] W[o, i]|^2``."""
    return _bilinear(F_rows, G_cols, blocks, coeff)


def check_range(values):
    """Raise GainRangeError if a correlation sum left the floating-point range."""
    if not np.all(np.isfinite(values)):
        raise GainRangeError("correlation function exceeds the floating-point range")
    return values


def _bilinear(P, Q, blocks, coeff):
    nx, ny = P.shape[1], Q.shape[1]
    out = np.zeros((nx, ny))
    with np.errstate(over="ignore", invalid="ignore"):
        for w, W in blocks:
            if coeff is not None:
                W = W * coeff[None, :]
            for y in range(ny):
                M = W @ (P * Q[:, y][:, None])
                out[:, y] += w @ (M.real**2 + M.imag**2)
    return check_range(out)


def amplitude_sum(F_rows, F_cols, inner_weights):
    """``sum_i conj(F_rows[i, x]) F_cols[i, y] a_i`` (outer index already summed)."""
    return (np.conj(F_rows).T * inner_weights) @ F_cols
