"""Far-field and near-field intensity profiles and correlation functions.

Far-field modes are ``u_ml(k) exp(+-i m phi) / sqrt(2 pi)`` with ``u`` orthonormal
under ``dk``.  Near-field radial modes are their Bessel transforms

    u~_ml(r) = i^m int dk sqrt(k) u_ml(k) J_m(k r),

orthonormal under ``r dr``.  Cuts through a fixed pair of azimuths need only the
radial functions; a ``+m`` mode and its ``-m`` partner contribute equally there, so
their sum carries the factor ``multiplicity``.  Azimuthal cuts resum the pair as
``2 cos(m dphi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bessel import bessel_j_descending
from .correlations import CorrelationSurface, Cut, auto_sum, check_range, cross_sum
from .gain import transverse_photon_numbers
from .grids import QuadratureGrid, build_grid, panel_refinement
from .kernels import GridCoverageError

_I_POWERS = (1.0, 1.0j, -1.0, -1.0j)


def i_power(m):
    return _I_POWERS[int(m) % 4]


def reference_k_index(grid, k_ref):
    return int(np.argmin(np.abs(grid.nodes - k_ref)))


def _mult(modes):
    return modes.multiplicity.astype(float)


def _radial(modes, which):
    return modes.signal if which == "signal" else modes.idler


def _auto_blocks(state):
    for w, v2, _ in state.col_blocks():
        yield w, v2


def _cross_blocks(state):
    for w, _, uv in state.col_blocks():
        yield w, uv


def azimuth_offsets(n):
    """Uniform offsets ``[-pi, pi)`` with ``0`` at index ``n // 2``."""
    return -math.pi + (2 * math.pi / n) * np.arange(n)


def azimuthal_resum(values, m, state, offsets, kind):
    """``sum_q |sum_ml c_m cos(m d) a_ml W_q,ml|^2`` over offsets ``d``.

    ``values`` are the per-mode factors ``a_ml`` (``m >= 0`` entries) already
    including ``1 / (2 pi)``; ``c_m`` is the multiplicity.  ``kind`` selects ``V^2``
    (auto) or ``U V`` (cross) weights.
    """
    m = np.asarray(m)
    orders = np.unique(m)
    pos = np.searchsorted(orders, m)
    cos = np.cos(np.outer(orders, offsets))
    cos[orders > 0] *= 2.0
    out = np.zeros(len(offsets))
    with np.errstate(over="ignore", invalid="ignore"):
        for _, v2, uv in state.col_blocks():
            W = v2 if kind == "auto" else uv
            g = np.zeros((W.shape[0], orders.size), dtype=complex)
            # group the (m, l) terms by order
            np.add.at(g.T, pos, (W * values[None, :]).T)
            s = g @ cos
            out += np.sum(s.real**2 + s.imag**2, axis=0)
    return check_range(out)


# ---------------------------------------------------------------------------
# far field

def farfield_intensity(state, modes):
    """Radial far-field profile ``n(k) = sum_ml mult |u_ml(k)|^2 sum_q V^2 / (2 pi)``."""
    n_ml = transverse_photon_numbers(state)
    return ((_mult(modes) * n_ml) @ np.abs(modes.signal) ** 2) / (2 * math.pi)


def farfield_intensity_map(state, modes, phis):
    """Intensity on ``(k, phi)`` from the explicit ``+-m`` expansion."""
    n_ml = transverse_photon_numbers(state)
    out = np.zeros((len(modes.grid), len(phis)))
    for j, phi in enumerate(phis):
        acc = np.zeros(len(modes.grid))
        for sign in (1, -1):
            sel = modes.m > 0 if sign < 0 else slice(None)
            t = modes.signal[sel] * np.exp(1j * sign * modes.m[sel] * phi)[:, None]
            acc += n_ml[sel] @ np.abs(t) ** 2
        out[:, j] = acc / (2 * math.pi)
    return out


def farfield_intensity_cut(state, modes, k_ref):
    """Radial cut normalized so that ``int n dk / k_ref = 1``."""
    n = farfield_intensity(state, modes)
    n = n * k_ref / modes.grid.integrate(n)
    return Cut(modes.grid.nodes, n, float("nan"), "n_s_k")


def farfield_radial_autocorrelation(state, modes, ref):
    """``A(k, k_ref)`` at ``phi = phi' = 0``; ``ref`` is a grid index."""
    u = modes.signal
    vals = auto_sum(u, u[:, [ref]], _auto_blocks(state), _mult(modes) / (2 * math.pi))[:, 0]
    return Cut(modes.grid.nodes, vals, float(modes.grid.nodes[ref]), "A_s_k")


def farfield_radial_crosscorrelation(state, modes, ref):
    """``C(k_s, k_i,ref)`` at ``phi_s = 0``, ``phi_i = pi``."""
    coeff = _mult(modes) * np.where(modes.m % 2 == 0, 1.0, -1.0) / (2 * math.pi)
    vals = cross_sum(modes.signal, modes.idler[:, [ref]], _cross_blocks(state), coeff)[:, 0]
    return Cut(modes.grid.nodes, vals, float(modes.grid.nodes[ref]), "C_s_k")


def farfield_radial_surfaces(state, modes, rows=None, cols=None):
    """Radial auto- and cross-correlation surfaces on grid nodes."""
    rows = slice(None) if rows is None else np.atleast_1d(rows)
    cols = slice(None) if cols is None else np.atleast_1d(cols)
    k = modes.grid.nodes
    coeff = _mult(modes) / (2 * math.pi)
    a = auto_sum(modes.signal[:, rows], modes.signal[:, cols], _auto_blocks(state), coeff)
    sign = np.where(modes.m % 2 == 0, 1.0, -1.0)
    c = cross_sum(modes.signal[:, rows], modes.idler[:, cols], _cross_blocks(state), coeff * sign)
    kinds = ("radial_wavevector", "radial_wavevector")
    return (CorrelationSurface(a, k[rows], k[cols], kinds, "far_field_radial", "raw", "A_s_k"),
            CorrelationSurface(c, k[rows], k[cols], kinds, "far_field_radial", "raw", "C_s_k"))


def farfield_azimuthal_autocorrelation(state, modes, ref, offsets):
    """``A(phi_0 + d, phi_0)`` at ``k = k_ref``; depends on ``d`` only."""
    a = np.abs(modes.signal[:, ref]) ** 2 / (2 * math.pi)
    vals = azimuthal_resum(a, modes.m, state, offsets, "auto")
    return Cut(np.asarray(offsets), vals, 0.0, "A_s_phi")


def farfield_azimuthal_crosscorrelation(state, modes, ref, offsets):
    """``C(phi_s, phi_i = pi)`` at ``k_ref`` against ``phi_s``, peaking at ``phi_s = 0``."""
    a = modes.signal[:, ref] * modes.idler[:, ref] / (2 * math.pi)
    # phi_s - phi_i = d - pi
    vals = azimuthal_resum(a, modes.m, state, np.asarray(offsets) - math.pi, "cross")
    return Cut(np.asarray(offsets), vals, 0.0, "C_s_phi")


# ---------------------------------------------------------------------------
# near field

@dataclass(frozen=True, eq=False)
class NearFieldModeSet:
    """Bessel-transformed radial modes ``u~_ml(r)`` for the ``m >= 0`` entries.

    ``parseval_error`` is the largest ``|int r |u~|^2 dr - 1|`` among modes; the
    weighted error uses ``lambda^2`` weights.
    """

    radial_modes: np.ndarray
    radius_grid: QuadratureGrid
    m: np.ndarray
    l: np.ndarray
    which: str
    norms: np.ndarray

    @property
    def parseval_error(self):
        return float(np.max(np.abs(self.norms - 1.0)))

    def weighted_parseval_error(self, eigenvalues):
        w = np.asarray(eigenvalues) ** 2
        return float(np.sum(w * np.abs(self.norms - 1.0)) / np.sum(w))


def radius_grid(cfg):
    """Uniform radius grid over ``[0, extent * w_p]`` with ``r dr`` weights."""
    g = cfg.grids
    n = max(int(g.nearfield_points * g.grid_scale), 8)
    return build_grid("radius", (0.0, g.nearfield_extent * cfg.pump.beam_radius_wp), n)


def reference_radius(cfg):
    return cfg.grids.nearfield_reference * cfg.pump.beam_radius_wp


def cut_radius_grid(cfg, optics):
    """Fine uniform grid centred on the reference radius (an exact node).

    Resolves the ``2 pi / k_perp0`` oscillations of near-field correlations, which
    the full-disc grid does not at large pump radii.
    """
    g = cfg.grids
    r0 = reference_radius(cfg)
    half = g.nearfield_cut_halfwidth * 2 * math.pi / optics.k_perp_s
    half = min(half, r0)
    n = max(int(g.nearfield_cut_points * g.grid_scale), 9)
    n += 1 - n % 2
    return build_grid("radius", (r0 - half, r0 + half), n)


class HankelTransform:
    """Quadrature of ``i^m int dk sqrt(k) u(k) J_m(k r)`` for all orders.

    Radial samples ``u`` on a composite Gauss-Legendre grid are interpolated panel
    by panel and integrated on a finer rule sized for the ``k r`` oscillations.
    """

    def __init__(self, k_grid, radii):
        self.radii = np.asarray(radii, dtype=float)
        self.refinement = panel_refinement(k_grid, max_phase_rate=float(np.max(self.radii)))
        self.kf = self.refinement.fine_nodes
        self.shape = self.kf.shape + (self.radii.size,)

    def matrices(self, m_max):
        """Yield ``(m, E_m)`` for ``m = m_max..0`` with ``u~ = u @ E_m``."""
        x = (self.kf[..., None] * self.radii).ravel()
        root = np.sqrt(self.kf)[..., None]
        for m, j in bessel_j_descending(int(m_max), x):
            e = self.refinement.transform(root * j.reshape(self.shape))
            yield m, i_power(m) * e


def nearfield_modes(modes, radii_grid, which="signal", tolerance=None):
    """Bessel transform of every retained radial mode.

    Parameters
    ----------
    modes : TransverseModes
    radii_grid : QuadratureGrid
        ``radius`` grid; norms are evaluated with its ``r dr`` weights.
    which : {"signal", "idler"}
    tolerance : float, optional
        Raise GridCoverageError when the ``lambda^2``-weighted Parseval error exceeds it.
    """
    u = _radial(modes, which)
    out = np.zeros((u.shape[0], len(radii_grid)), dtype=complex)
    ht = HankelTransform(modes.grid, radii_grid.nodes)
    for m, e in ht.matrices(int(modes.m.max())):
        sel = np.nonzero(modes.m == m)[0]
        if sel.size:
            out[sel] = u[sel] @ e
    norms = (np.abs(out) ** 2) @ radii_grid.weights
    result = NearFieldModeSet(out, radii_grid, modes.m, modes.l, which, norms)
    if tolerance is not None:
        err = result.weighted_parseval_error(modes.eigenvalues)
        if err > tolerance:
            raise GridCoverageError(f"near-field window misses {err:.2e} of the mode norm")
    return result


def nearfield_flux(state, modes, near):
    """``I(r) = sum_ml mult |u~_ml(r)|^2 sum_q V^2 / (2 pi)`` at ``psi = 0``."""
    n_ml = transverse_photon_numbers(state)
    return ((_mult(modes) * n_ml) @ np.abs(near.radial_modes) ** 2) / (2 * math.pi)


def nearfield_flux_cut(state, modes, near):
    """Radial flux normalized so that ``int r I dr = 1/2``."""
    vals = nearfield_flux(state, modes, near)
    vals = vals / (2 * float(vals @ near.radius_grid.weights))
    return Cut(near.radius_grid.nodes, vals, float("nan"), "I_s_r")


def nearfield_radial_autocorrelation(state, modes, near, ref):
    """``A(r, r_ref)`` at ``psi = psi' = 0``."""
    u = near.radial_modes
    vals = auto_sum(u, u[:, [ref]], _auto_blocks(state), _mult(modes) / (2 * math.pi))[:, 0]
    r = near.radius_grid.nodes
    return Cut(r, vals, float(r[ref]), "A_s_r")


def nearfield_radial_crosscorrelation(state, modes, near_s, near_i, ref):
    """``C(r_s, r_i,ref)`` at ``psi_s = psi_i = 0``."""
    vals = cross_sum(near_s.radial_modes, near_i.radial_modes[:, [ref]], _cross_blocks(state),
                     _mult(modes) / (2 * math.pi))[:, 0]
    r = near_s.radius_grid.nodes
    return Cut(r, vals, float(near_i.radius_grid.nodes[ref]), "C_s_r")


def nearfield_amplitude_cut(state, modes, near, ref):
    """``|sum_q A^a_q(r, r_ref)|`` at ``psi = psi' = 0``."""
    n_ml = transverse_photon_numbers(state)
    u = near.radial_modes
    vals = (np.conj(u).T * (_mult(modes) * n_ml)) @ u[:, ref] / (2 * math.pi)
    r = near.radius_grid.nodes
    return Cut(r, np.abs(vals), float(r[ref]), "A_a_s_r")


def nearfield_azimuthal_autocorrelation(state, modes, near, ref, offsets):
    """``A(psi_0 + d, psi_0)`` at radius node ``ref``."""
    a = np.abs(near.radial_modes[:, ref]) ** 2 / (2 * math.pi)
    vals = azimuthal_resum(a, modes.m, state, offsets, "auto")
    return Cut(np.asarray(offsets), vals, 0.0, "A_s_psi")


def nearfield_azimuthal_crosscorrelation(state, modes, near_s, near_i, ref, offsets):
    """``C(psi_0 + d, psi_0)`` at radius node ``ref`` of both fields."""
    a = near_s.radial_modes[:, ref] * near_i.radial_modes[:, ref] / (2 * math.pi)
    vals = azimuthal_resum(a, modes.m, state, offsets, "cross")
    return Cut(np.asarray(offsets), vals, 0.0, "C_s_psi")


def nearfield_azimuthal_amplitude(state, modes, near, ref, offsets):
    """``|sum_q A^a_q(psi_0 + d, psi_0)|`` at radius node ``ref``."""
    a = np.abs(near.radial_modes[:, ref]) ** 2
    return Cut(np.asarray(offsets), azimuthal_amplitude(state, modes, a, offsets), 0.0, "A_a_s_psi")


def azimuthal_amplitude(state, modes, values, offsets):
    """``|sum_ml c_m cos(m d) a_ml sum_q V^2| / (2 pi)`` for ``m >= 0`` entries ``a_ml``."""
    n_ml = transverse_photon_numbers(state)
    orders = np.unique(modes.m)
    g = np.zeros(orders.size)
    np.add.at(g, np.searchsorted(orders, modes.m), values * n_ml)
    c = np.where(orders > 0, 2.0, 1.0) * g
    vals = c @ np.cos(np.outer(orders, offsets)) / (2 * math.pi)
    return np.abs(vals)


def farfield_amplitude_cut(state, modes, ref):
    """``|sum_q A^a_q(k, k_ref)|`` at ``phi = phi' = 0``."""
    n_ml = transverse_photon_numbers(state)
    u = modes.signal
    vals = (np.conj(u).T * (_mult(modes) * n_ml)) @ u[:, ref] / (2 * math.pi)
    return Cut(modes.grid.nodes, np.abs(vals), float(modes.grid.nodes[ref]), "A_a_s_k")


def farfield_azimuthal_amplitude(state, modes, ref, offsets):
    """``|sum_q A^a_q(phi_0 + d, phi_0)|`` at ``k_ref``."""
    a = np.abs(modes.signal[:, ref]) ** 2
    return Cut(np.asarray(offsets), azimuthal_amplitude(state, modes, a, offsets), 0.0, "A_a_s_phi")


class LowGainAmplitudeAccumulator:
    """Streaming near-field amplitude correlation ``A^a(r, r_ref)`` in the low-gain limit.

    There ``sum_q V^2`` is proportional to ``lambda_ml^2``, so the cut shape follows
    from the singular values of each order without the global normalization.  Used
    as the ``visitor`` of :func:`twinbeam.pipeline.build_transverse` for runs whose
    modes do not fit in memory.  Orders must arrive from ``m_max`` down to 0.
    """

    def __init__(self, k_grid, radii_grid, ref, m_max, threshold):
        self.radii = radii_grid
        self.ref = int(ref)
        self.threshold = float(threshold)
        self._matrices = HankelTransform(k_grid, radii_grid.nodes).matrices(int(m_max))
        self.values = np.zeros(len(radii_grid), dtype=complex)
        self.mode_count = 0

    def __call__(self, m, s, fs, fi):
        order, e = next(self._matrices)
        if order != m:
            raise ValueError(f"orders out of sequence: expected {order}, got {m}")
        keep = s >= self.threshold
        if not np.any(keep):
            return
        ut = fs[keep] @ e
        mult = 1.0 if m == 0 else 2.0
        self.values += mult * ((s[keep] ** 2) * np.conj(ut).T) @ ut[:, self.ref]
        self.mode_count += int(mult * np.count_nonzero(keep))

    def cut(self):
        r = self.radii.nodes
        vals = np.abs(self.values)
        return Cut(r, vals / vals[self.ref], float(r[self.ref]), "A_a_s_r")
