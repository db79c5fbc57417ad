"""Assembly of kernels, Schmidt decompositions and gain states for one configuration."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import correlations, dimensionality, gain, kernels, schmidt, spectral, temporal, transverse
from .dispersion import central_optics
from .gain import GainState


@dataclass
class Model:
    """Decomposed twin-beam model at the configured pump power.

    ``coupling_ref`` is ``t_perp * f_par`` at ``cfg.pump.power_Pp``; the gain argument
    of mode ``(ml, q)`` at power ``P`` is ``coupling_ref sqrt(P / P_ref) lam_ml lam_q``.
    """

    cfg: object
    optics: object
    spectral_kernel: kernels.SpectralKernel
    spectral: schmidt.SchmidtDecomposition
    transverse: schmidt.TransverseModes | None
    density: schmidt.EigenvalueDensity | None
    norm_t_perp: float
    timings: dict = field(default_factory=dict)

    @property
    def coupling_ref(self):
        return self.norm_t_perp * self.spectral_kernel.norm_f_parallel

    def coupling(self, power):
        return self.coupling_ref * math.sqrt(power / self.cfg.pump.power_Pp)

    def state(self, power, quasi_continuum=True):
        """Gain state at ``power``: quasi-continuum nodes or the explicit (m, l) sum."""
        if quasi_continuum:
            perp, weight = self.density.nodes, self.density.counts
        else:
            perp, weight = self.transverse.eigenvalues, self.transverse.multiplicity.astype(float)
        return GainState(perp, self.spectral.eigenvalues, self.coupling(power), float(power), weight)

    def power_for_gain(self, gain):
        """Pump power at which the strongest mode has gain argument ``gain``."""
        top = self.coupling_ref * float(np.max(self.transverse.eigenvalues if self.transverse is not None
                                                else self.density.nodes)) * float(self.spectral.eigenvalues[0])
        return self.cfg.pump.power_Pp * (gain / top) ** 2


def build_spectral(cfg, optics=None, check=True):
    optics = optics or central_optics(cfg)
    sk = kernels.build_spectral_kernel(cfg, optics=optics, check=check)
    decomp = schmidt.decompose(sk.values, sk.grid_s, sk.grid_i, cutoff=cfg.grids.spectral_cutoff)
    return sk, decomp


def build_transverse(cfg, optics=None, compute_modes=True, check=True, progress=None, visitor=None,
                     keep_modes=None, chunk=32, setup=None):
    """Transverse modes for all azimuthal orders with the aliasing guard.

    Orders are processed from ``m_max`` down to 0.  ``visitor(m, s, fs, fi)``, if
    given, sees the singular values and phase-fixed radial functions of every order
    before truncation, so large runs can reduce modes without storing them
    (``keep_modes=False``).
    """
    optics = optics or central_optics(cfg)
    setup = setup or kernels.prepare_transverse(cfg, optics=optics, check=check)
    keep = compute_modes if keep_modes is None else keep_modes
    need_vectors = compute_modes or visitor is not None
    m_values = np.arange(setup.m_max, -1, -1)
    acc = schmidt.TransverseAccumulator(setup.grid, setup.norm_t_perp, cfg.grids.lambda_cutoff, keep)
    w = setup.grid.weights
    sw = np.sqrt(w)
    for start in range(0, m_values.size, chunk):
        block_m = m_values[start:start + chunk]
        for m, mat in zip(block_m, setup.weighted_harmonics(block_m)):
            s, u, vh = schmidt.weighted_svd(mat, w, w, need_vectors)
            acc.add(int(m), s, u, vh)
            if visitor is not None:
                fs, fi = schmidt.fix_phases(u.T / sw[None, :], vh / sw[None, :])
                visitor(int(m), s, fs, fi)
        if progress:
            progress(int(block_m[-1]), setup.m_max)
    if check:
        kernels.check_harmonic_tail(acc.energies[setup.m_max], acc.total_energy)
    return acc.finish(), setup


def build_model(cfg, transverse=True, compute_modes=True, check=True, progress=None,
                transverse_modes=None):
    """Build the full model.

    ``transverse=False`` skips the transverse decomposition; ``transverse_modes``
    supplies a precomputed one (for example eigenvalue-only modes from
    :func:`large_scale_transverse`).
    """
    timings = {}
    t0 = time.perf_counter()
    optics = central_optics(cfg)
    sk, decomp = build_spectral(cfg, optics, check)
    timings["spectral"] = time.perf_counter() - t0
    modes = density = None
    norm = 1.0
    if transverse_modes is not None:
        modes = transverse_modes
        norm = modes.norm_t_perp
        density = schmidt.eigenvalue_density(modes.eigenvalues, modes.multiplicity,
                                             bins=cfg.grids.density_bins)
    elif transverse:
        t0 = time.perf_counter()
        modes, setup = build_transverse(cfg, optics, compute_modes, check, progress)
        norm = setup.norm_t_perp
        density = schmidt.eigenvalue_density(modes.eigenvalues, modes.multiplicity,
                                             bins=cfg.grids.density_bins)
        timings["transverse"] = time.perf_counter() - t0
    return Model(cfg, optics, sk, decomp, modes, density, norm, timings)


class Analysis:
    """Observables of a built model at arbitrary pump powers.

    Power-independent transforms (temporal modes, near-field modes) are computed on
    first use and cached.  Spectral and temporal observables use the quasi-continuum
    transverse sum; far- and near-field observables use the explicit mode sum.
    """

    def __init__(self, model):
        self.model = model
        self.cfg = model.cfg
        self._cache = {}
        self._cuts = {}

    def _per_power(self, kind, power, fn):
        key = (kind, float(power))
        if key not in self._cuts:
            self._cuts[key] = fn()
        return self._cuts[key]

    def _cached(self, key, fn):
        if key not in self._cache:
            t0 = time.perf_counter()
            self._cache[key] = fn()
            self.model.timings[key] = time.perf_counter() - t0
        return self._cache[key]

    # spectral and temporal --------------------------------------------------
    @property
    def spectral_ref(self):
        g = self.model.spectral.grid_s
        return g.nodes.size // 2

    def temporal_modes(self):
        def build():
            d = self.model.spectral
            tg = temporal.default_time_grid(self.cfg, d)
            return (temporal.temporal_modes(d, tg, "signal"), temporal.temporal_modes(d, tg, "idler"))
        return self._cached("temporal_modes", build)

    def spectral_cuts(self, power):
        return self._per_power("spectral_cuts", power, lambda: self._spectral_cuts(power))

    def _spectral_cuts(self, power):
        st = self.model.state(power)
        d = self.model.spectral
        ref = self.spectral_ref
        return {
            "n_s_omega": spectral.spectrum_cut(st, d),
            "A_s_omega": spectral.autocorrelation_cut(st, d, ref),
            "C_omega": spectral.crosscorrelation_cut(st, d, ref),
            "A_a_s_omega": spectral.amplitude_cut(st, d, ref),
        }

    def temporal_cuts(self, power):
        return self._per_power("temporal_cuts", power, lambda: self._temporal_cuts(power))

    def _temporal_cuts(self, power):
        st = self.model.state(power)
        ts, ti = self.temporal_modes()
        flux = temporal.flux_cut(st, ts)
        ref_s = temporal.peak_index(flux.values)
        ref_i = temporal.peak_index(temporal.photon_flux(st, ti))
        return {
            "I_s_t": flux,
            "A_s_t": temporal.autocorrelation_cut(st, ts, ref_s),
            "C_t": temporal.crosscorrelation_cut(st, ts, ti, ref_i),
            "A_a_s_t": temporal.amplitude_cut(st, ts, ref_s),
        }

    # far field ----------------------------------------------------------------
    @property
    def k_ref(self):
        return transverse.reference_k_index(self.model.transverse.grid, self.model.optics.k_perp_s)

    def offsets(self):
        return transverse.azimuth_offsets(kernels.azimuth_points(int(self.model.transverse.m.max())))

    def farfield_cuts(self, power):
        return self._per_power("farfield_cuts", power, lambda: self._farfield_cuts(power))

    def _farfield_cuts(self, power):
        modes = self.model.transverse
        st = self.model.state(power, quasi_continuum=False)
        ref = self.k_ref
        off = self.offsets()
        return {
            "n_s_k": transverse.farfield_intensity_cut(st, modes, float(modes.grid.nodes[ref])),
            "A_s_k": transverse.farfield_radial_autocorrelation(st, modes, ref),
            "C_s_k": transverse.farfield_radial_crosscorrelation(st, modes, ref),
            "A_a_s_k": transverse.farfield_amplitude_cut(st, modes, ref),
            "A_s_phi": transverse.farfield_azimuthal_autocorrelation(st, modes, ref, off),
            "C_s_phi": transverse.farfield_azimuthal_crosscorrelation(st, modes, ref, off),
            "A_a_s_phi": transverse.farfield_azimuthal_amplitude(st, modes, ref, off),
        }

    # near field ---------------------------------------------------------------
    def nearfield_modes(self):
        def build():
            modes = self.model.transverse
            disc = transverse.nearfield_modes(modes, transverse.radius_grid(self.cfg), "signal")
            cut_grid = transverse.cut_radius_grid(self.cfg, self.model.optics)
            cut_s = transverse.nearfield_modes(modes, cut_grid, "signal")
            cut_i = transverse.nearfield_modes(modes, cut_grid, "idler")
            return disc, cut_s, cut_i
        return self._cached("nearfield_modes", build)

    def nearfield_cuts(self, power):
        return self._per_power("nearfield_cuts", power, lambda: self._nearfield_cuts(power))

    def _nearfield_cuts(self, power):
        modes = self.model.transverse
        st = self.model.state(power, quasi_continuum=False)
        disc, cut_s, cut_i = self.nearfield_modes()
        ref = len(cut_s.radius_grid) // 2
        off = self.offsets()
        return {
            "I_s_r": transverse.nearfield_flux_cut(st, modes, disc),
            "A_s_r": transverse.nearfield_radial_autocorrelation(st, modes, cut_s, ref),
            "C_s_r": transverse.nearfield_radial_crosscorrelation(st, modes, cut_s, cut_i, ref),
            "A_a_s_r": transverse.nearfield_amplitude_cut(st, modes, cut_s, ref),
            "A_s_psi": transverse.nearfield_azimuthal_autocorrelation(st, modes, cut_s, ref, off),
            "C_s_psi": transverse.nearfield_azimuthal_crosscorrelation(st, modes, cut_s, cut_i, ref, off),
            "A_a_s_psi": transverse.nearfield_azimuthal_amplitude(st, modes, cut_s, ref, off),
        }

    # quantifiers --------------------------------------------------------------
    def report(self, power, spectral_widths=True, temporal_widths=True, transverse_widths=True):
        """Dimensionality report at ``power``; optional width ratios."""
        st = self.model.state(power)
        q = dimensionality.gain_quantifiers(st)
        extra = {}
        widths = {}
        if spectral_widths:
            c = self.spectral_cuts(power)
            widths["n_s_omega"] = c["n_s_omega"].fwhm()
            widths["A_a_s_omega"] = c["A_a_s_omega"].fwhm(anchored=True)
            extra["K_delta_spectral"] = dimensionality.width_ratio(widths["n_s_omega"],
                                                                   widths["A_a_s_omega"])
        if temporal_widths:
            c = self.temporal_cuts(power)
            widths["I_s_t"] = c["I_s_t"].fwhm()
            widths["A_a_s_t"] = c["A_a_s_t"].fwhm(anchored=True)
            extra["K_delta_temporal"] = dimensionality.width_ratio(widths["I_s_t"], widths["A_a_s_t"])
        if transverse_widths and self.model.transverse is not None:
            modes = self.model.transverse
            explicit = self.model.state(power, quasi_continuum=False)
            c = self.farfield_cuts(power)
            widths["n_s_k"] = c["n_s_k"].fwhm()
            widths["A_a_s_k"] = c["A_a_s_k"].fwhm(anchored=True)
            widths["A_a_s_phi"] = c["A_a_s_phi"].fwhm(anchored=True, period=2 * math.pi)
            extra["K_delta_farfield"] = (
                dimensionality.width_ratio(widths["n_s_k"], widths["A_a_s_k"])
                * dimensionality.width_ratio(2 * math.pi, widths["A_a_s_phi"]))
            c = self.nearfield_cuts(power)
            widths["I_s_r"] = c["I_s_r"].fwhm(origin_symmetric=True)
            widths["A_a_s_r_first_moment"] = correlations.first_moment_width(
                c["A_a_s_r"].coordinate, c["A_a_s_r"].values, c["A_a_s_r"].reference)
            extra["K_delta_nearfield"] = dimensionality.width_ratio(
                widths["I_s_r"], widths["A_a_s_r_first_moment"]) ** 2
            radial, azimuthal = dimensionality.directional_counts(
                modes, dimensionality.gain_weights(explicit))
            extra["radial_count"], extra["azimuthal_count"] = radial, azimuthal
        return dimensionality.DimensionalityReport(
            float(power), st.top_gain, gain.photon_number(st), q.K, q.K_omega, q.K_kphi, q.K_n,
            q.K_n_omega, q.K_n_kphi, q.p_perp, q.p_par, widths=widths, **extra)


def peak_singular_value(setup, orders=16):
    """Largest transverse singular value among the lowest azimuthal orders."""
    w = setup.grid.weights
    m_values = np.arange(min(orders, setup.m_max) + 1)
    return max(float(schmidt.weighted_svd(mat, w, w, False)[0][0])
               for mat in setup.weighted_harmonics(m_values))


def large_scale_transverse(cfg, nearfield=True, progress=None, check=True):
    """Eigenvalue-only transverse decomposition plus the low-gain near-field amplitude cut.

    Designed for pump radii where the full mode set does not fit in memory.  Returns
    ``(TransverseModes without radial functions, Cut or None, timings)``.
    """
    timings = {}
    t0 = time.perf_counter()
    optics = central_optics(cfg)
    setup = kernels.prepare_transverse(cfg, optics=optics, check=check)
    timings["setup"] = time.perf_counter() - t0
    visitor = None
    if nearfield:
        grid = transverse.cut_radius_grid(cfg, optics)
        threshold = cfg.grids.lambda_cutoff * peak_singular_value(setup)
        visitor = transverse.LowGainAmplitudeAccumulator(setup.grid, grid, len(grid) // 2,
                                                         setup.m_max, threshold)
    t0 = time.perf_counter()
    modes, _ = build_transverse(cfg, optics, compute_modes=False, check=check, progress=progress,
                                visitor=visitor, keep_modes=False, setup=setup)
    timings["transverse"] = time.perf_counter() - t0
    return modes, (visitor.cut() if visitor else None), timings
