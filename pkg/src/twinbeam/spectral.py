"""Spectral intensity, amplitude and intensity correlations of the twin beam.

Transverse modes enter only through their gain arguments, so every function takes
a :class:`~twinbeam.gain.GainState` (explicit mode sum or quasi-continuum nodes) and
the spectral Schmidt decomposition.
"""

from __future__ import annotations

import numpy as np

from .correlations import CorrelationSurface, Cut, amplitude_sum, auto_sum, cross_sum
from .gain import mode_photon_numbers


def _auto_blocks(state):
    for w, v2, _ in state.row_blocks():
        yield w, v2


def _cross_blocks(state):
    for w, _, uv in state.row_blocks():
        yield w, uv


def _select(modes, index):
    if index is None:
        return modes
    return modes[:, np.atleast_1d(index)]


def intensity_spectrum(state, decomp, modes=None):
    """``n(w) = sum_ml sum_q |f_s,q(w)|^2 V^2``; ``modes`` overrides the signal modes."""
    f = decomp.signal_modes if modes is None else modes
    return mode_photon_numbers(state) @ (np.abs(f) ** 2)


def amplitude_autocorrelation(state, decomp, lam_perp, rows=None, cols=None, modes=None):
    """``A^a(w, w') = sum_q conj(f_q(w)) f_q(w') V^2(lam_perp, q)`` for one transverse eigenvalue."""
    f = decomp.signal_modes if modes is None else modes
    v2 = np.sinh(state.coupling * lam_perp * state.par) ** 2
    return amplitude_sum(_select(f, rows), _select(f, cols), v2)


def averaged_amplitude_autocorrelation(state, decomp, rows=None, cols=None, modes=None):
    """Amplitude correlation summed over all transverse modes."""
    f = decomp.signal_modes if modes is None else modes
    return amplitude_sum(_select(f, rows), _select(f, cols), mode_photon_numbers(state))


def intensity_autocorrelation(state, decomp, rows=None, cols=None, modes=None, domain="spectral"):
    """``A(w, w') = sum_ml |A^a_ml(w, w')|^2`` on the selected grid nodes."""
    f = decomp.signal_modes if modes is None else modes
    grid = decomp.grid_s.nodes if modes is None else None
    values = auto_sum(_select(f, rows), _select(f, cols), _auto_blocks(state))
    return _surface(values, grid, grid, rows, cols, domain, "A")


def intensity_crosscorrelation(state, decomp, rows=None, cols=None, modes=None, domain="spectral"):
    """``C(w_s, w_i) = sum_ml |sum_q f_s,q(w_s) f_i,q(w_i) U V|^2``."""
    fs = decomp.signal_modes if modes is None else modes[0]
    fi = decomp.idler_modes if modes is None else modes[1]
    values = cross_sum(_select(fs, rows), _select(fi, cols), _cross_blocks(state))
    gs = decomp.grid_s.nodes if modes is None else None
    gi = decomp.grid_i.nodes if modes is None else None
    return _surface(values, gs, gi, rows, cols, domain, "C")


def _surface(values, g1, g2, rows, cols, domain, name):
    a1 = np.arange(values.shape[0]) if g1 is None else (g1 if rows is None else g1[np.atleast_1d(rows)])
    a2 = np.arange(values.shape[1]) if g2 is None else (g2 if cols is None else g2[np.atleast_1d(cols)])
    kind = "frequency" if domain == "spectral" else "time"
    return CorrelationSurface(values, a1, a2, (kind, kind), domain, "raw", name)


# ---------------------------------------------------------------------------
# cuts through the central frequencies

def reference_index(grid, value):
    return int(np.argmin(np.abs(grid.nodes - value)))


def autocorrelation_cut(state, decomp, ref):
    """``A(w, w_ref)`` over the signal grid; ``ref`` is a grid index."""
    values = intensity_autocorrelation(state, decomp, cols=ref).values[:, 0]
    x = decomp.grid_s.nodes
    return Cut(x, values, float(x[ref]), "A_s_omega")


def crosscorrelation_cut(state, decomp, ref_idler):
    """``C(w_s, w_i_ref)`` over the signal grid."""
    values = intensity_crosscorrelation(state, decomp, cols=ref_idler).values[:, 0]
    x = decomp.grid_s.nodes
    return Cut(x, values, float(decomp.grid_i.nodes[ref_idler]), "C_omega")


def amplitude_cut(state, decomp, ref):
    """Transverse-averaged amplitude correlation ``|sum_ml A^a_ml(w, w_ref)|``."""
    values = averaged_amplitude_autocorrelation(state, decomp, cols=ref)[:, 0]
    x = decomp.grid_s.nodes
    return Cut(x, np.abs(values), float(x[ref]), "A_a_s_omega")


def spectrum_cut(state, decomp):
    x = decomp.grid_s.nodes
    return Cut(x, intensity_spectrum(state, decomp), float("nan"), "n_s_omega")


def overlap(a, b, weights):
    """Normalized overlap ``<a, b>^2 / (<a, a> <b, b>)`` of non-negative profiles."""
    a = a / np.max(a)
    b = b / np.max(b)
    ab = float(np.sum(weights * a * b))
    return ab * ab / (float(np.sum(weights * a * a)) * float(np.sum(weights * b * b)))


def dominant_mode_overlap(state, decomp):
    """Overlap of the intensity spectrum with ``|f_s,0|^2``."""
    n = intensity_spectrum(state, decomp)
    return overlap(n, np.abs(decomp.signal_modes[0]) ** 2, decomp.grid_s.weights)
