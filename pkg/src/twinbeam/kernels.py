"""Two-photon kernels: spectral amplitude and transverse kernel with azimuthal harmonics.

The spectral kernel is evaluated along the central emission directions and the
transverse kernel at the central frequencies (the two factorize).  Both keep the
phase of the analytic z-integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from . import grids as _grids
from .config import C_LIGHT, pump_field_scale, pump_transverse_spectrum
from .dispersion import central_optics


class GridCoverageError(RuntimeError):
    pass


class HarmonicTruncationError(RuntimeError):
    pass


def sinc(x):
    """``sin(x) / x`` (unnormalized)."""
    return np.sinc(np.asarray(x) / math.pi)


def z_average(mismatch, length):
    """``(1/L) int_0^L exp(i * mismatch * z) dz`` in closed form."""
    half = 0.5 * np.asarray(mismatch) * length
    return np.exp(1j * half) * sinc(half)


# ---------------------------------------------------------------------------
# natural scales and grids

def spectral_natural_width(optics, length):
    """Offset along the anti-diagonal of the first zero of the phase-matching sinc.

    Scans ``w_s = w_s0 + nu``, ``w_i = w_i0 - nu`` on both sides and returns the
    smaller of the two first-zero offsets.
    """
    nu = np.geomspace(1e-6, 0.3, 4000) * optics.omega_s
    best = math.inf
    for sign in (1.0, -1.0):
        phase = np.abs(optics.longitudinal_mismatch(optics.omega_s + sign * nu,
                                                    optics.omega_i - sign * nu)) * length / 2
        hit = np.nonzero(phase >= math.pi)[0]
        if hit.size:
            best = min(best, nu[hit[0]])
    if not math.isfinite(best):
        raise GridCoverageError("phase-matching sinc has no zero within 30% of the carrier")
    return best


def radial_natural_width(optics, length):
    """Radial offset (signal and idler together) of the first transverse sinc zero."""
    a = optics.cos_s**3 / (2 * optics.k_s) + optics.cos_i**3 / (2 * optics.k_i)
    return math.sqrt(2 * math.pi / (length * a))


def pump_ridge_width(pump):
    """Half width ``2/tau`` of the pump field envelope in the frequency sum."""
    return 2.0 / pump.duration_tau_p


def _odd_panel_count(points, panel_nodes):
    panels = max(3, math.ceil(points / panel_nodes))
    return panels + 1 if panels % 2 == 0 else panels


def spectral_grid(cfg, optics=None):
    """Frequency grid for the signal (identical layout used for the idler offsets)."""
    optics = optics or central_optics(cfg)
    g = cfg.grids
    half = g.spectral_halfwidth * spectral_natural_width(optics, cfg.crystal.length_L)
    if g.spectral_points:
        points = g.spectral_points
    else:
        # node spacing 0.4 of the pump ridge half width
        points = 2 * half / (0.4 * pump_ridge_width(cfg.pump))
    points = max(points * g.grid_scale, 16)
    panels = _odd_panel_count(points, g.panel_nodes)
    return _grids.centered_grid("frequency", optics.omega_s, half, panels * g.panel_nodes,
                                g.panel_nodes), _grids.centered_grid(
        "frequency", optics.omega_i, half, panels * g.panel_nodes, g.panel_nodes)


def radial_grid(cfg, optics=None):
    """Radial wave-vector grid around the central emission ring."""
    optics = optics or central_optics(cfg)
    g = cfg.grids
    half = g.radial_halfwidth * radial_natural_width(optics, cfg.crystal.length_L)
    if g.radial_points:
        points = g.radial_points
    else:
        points = 2 * half / (1.3 / cfg.pump.beam_radius_wp)
    points = max(points * g.grid_scale, 16)
    panels = _odd_panel_count(points, g.panel_nodes)
    center = optics.k_perp_s
    if center - half <= 0:
        return _grids.build_grid("radial_wavevector", (0.0, center + half), panels * g.panel_nodes,
                                 g.panel_nodes)
    return _grids.centered_grid("radial_wavevector", center, half, panels * g.panel_nodes,
                                g.panel_nodes)


def default_m_max(cfg, optics=None):
    """Azimuthal cutoff from the harmonic decay ``exp(-m^2 / x)`` with ``x = w^2 k0^2 / 2``."""
    if cfg.grids.m_max:
        return cfg.grids.m_max
    optics = optics or central_optics(cfg)
    w = cfg.pump.beam_radius_wp
    x = 0.5 * (w * optics.k_perp_s) ** 2
    k_hi = optics.k_perp_s + cfg.grids.radial_halfwidth * radial_natural_width(optics, cfg.crystal.length_L)
    x_hi = 0.5 * (w * k_hi) ** 2
    return int(math.ceil(math.sqrt(max(x, x_hi) * math.log(1e7)))) + 8


def azimuth_points(m_max):
    """Next power of two at least ``8 * m_max``."""
    return 1 << max(5, math.ceil(math.log2(max(8 * m_max, 32))))


# ---------------------------------------------------------------------------
# coverage check

def ridge_tail_fraction(intensity, center, half, across, along_sign, n_along=801, n_across=81):
    """Fraction of ``int |K|^2`` lying outside a square window.

    The kernel is assumed concentrated along a ridge.  It is sampled on a rotated
    grid: ``a`` runs along the ridge over twice the window and ``b`` across it over
    ``[-across, across]``.  Offsets are ``x = a + b/2`` and ``y = along_sign * a + b/2``
    when ``along_sign = -1`` (anti-diagonal ridge), or ``x = a + b/2, y = a - b/2``.
    """
    a = np.linspace(-2 * half, 2 * half, n_along)
    b = np.linspace(-across, across, n_across)
    A, B = np.meshgrid(a, b, indexing="ij")
    if along_sign < 0:
        x, y = A + B / 2, -A + B / 2
    else:
        x, y = A + B / 2, A - B / 2
    vals = intensity(center[0] + x, center[1] + y)
    inside = (np.abs(x) <= half) & (np.abs(y) <= half)
    total = trapezoid(trapezoid(vals, b, axis=1), a)
    if not total > 0:
        raise GridCoverageError("kernel vanishes on the coverage scan")
    kept = trapezoid(trapezoid(np.where(inside, vals, 0.0), b, axis=1), a)
    return float(1.0 - kept / total)


# ---------------------------------------------------------------------------
# spectral kernel

@dataclass(frozen=True, eq=False)
class SpectralKernel:
    """Sampled spectral two-photon amplitude.

    ``values`` is the normalized kernel (unit norm under the grid quadrature);
    ``norm_f_parallel`` is its norm before normalization.
    """

    values: np.ndarray
    grid_s: _grids.QuadratureGrid
    grid_i: _grids.QuadratureGrid
    norm_f_parallel: float
    tail_fraction: float = 0.0


def spectral_kernel_values(cfg, omega_s, omega_i, optics=None):
    """Unnormalized spectral amplitude at broadcast frequency arrays."""
    optics = optics or central_optics(cfg)
    L = cfg.crystal.length_L
    ws = np.asarray(omega_s, dtype=float)
    wi = np.asarray(omega_i, dtype=float)
    k_s = optics.k(ws, "signal")
    k_i = optics.k(wi, "idler")
    tau = cfg.pump.duration_tau_p
    xi = pump_field_scale(cfg.pump, optics.k_p)
    pump = xi * math.sqrt(tau / math.sqrt(2 * math.pi)) * np.exp(-(tau * (ws + wi - optics.omega_p)) ** 2 / 4)
    pref = 2j * cfg.crystal.d_eff / ((2 * math.pi) ** 1.5 * C_LIGHT**2)
    mismatch = optics.longitudinal_mismatch(ws, wi)
    return pref * ws * wi / np.sqrt(k_s * k_i) * pump * L * z_average(mismatch, L)


def spectral_intensity_fn(cfg, optics=None):
    optics = optics or central_optics(cfg)
    return lambda ws, wi: np.abs(spectral_kernel_values(cfg, ws, wi, optics)) ** 2


def build_spectral_kernel(cfg, grid_pair=None, optics=None, check=True):
    """Spectral kernel on Gauss-Legendre grids with its norm ``f_par``.

    Raises GridCoverageError if more than ``grids.tail_tolerance`` of the kernel
    energy falls outside the window.
    """
    optics = optics or central_optics(cfg)
    grid_s, grid_i = grid_pair or spectral_grid(cfg, optics)
    tail = 0.0
    if check:
        half = 0.5 * (grid_s.nodes[-1] - grid_s.nodes[0])
        tail = ridge_tail_fraction(
            spectral_intensity_fn(cfg, optics), (optics.omega_s, optics.omega_i), half,
            across=8 * pump_ridge_width(cfg.pump), along_sign=-1)
        if tail > cfg.grids.tail_tolerance:
            raise GridCoverageError(
                f"spectral window holds only {1 - tail:.4f} of the kernel energy; widen it")
    values = spectral_kernel_values(cfg, grid_s.nodes[:, None], grid_i.nodes[None, :], optics)
    norm = math.sqrt(float(grid_s.weights @ (np.abs(values) ** 2) @ grid_i.weights))
    return SpectralKernel(values / norm, grid_s, grid_i, norm, tail)


# ---------------------------------------------------------------------------
# transverse kernel

def transverse_kernel_values(cfg, k_s, k_i, delta_phi, optics=None):
    """Unnormalized z-averaged transverse kernel at broadcast arguments."""
    optics = optics or central_optics(cfg)
    k_s = np.asarray(k_s, dtype=float)
    k_i = np.asarray(k_i, dtype=float)
    kp = np.sqrt(np.maximum(k_s * k_s + k_i * k_i + 2 * k_s * k_i * np.cos(delta_phi), 0.0))
    phase = optics.transverse_mismatch(k_s, k_i, delta_phi)
    return pump_transverse_spectrum(kp, cfg.pump) * z_average(-phase, cfg.crystal.length_L)


def transverse_marginal_fn(cfg, optics=None, n_phi=129):
    """``k_s k_i int |T|^2 d(delta phi)`` evaluated by local quadrature around ``pi``."""
    optics = optics or central_optics(cfg)
    w = cfg.pump.beam_radius_wp

    def marginal(ks, ki):
        ks = np.asarray(ks, dtype=float)
        ki = np.asarray(ki, dtype=float)
        prod = np.maximum(ks * ki, (1.0 / w) ** 2)
        half = np.minimum(12.0 / (w * np.sqrt(prod)), math.pi)
        t = np.linspace(-1.0, 1.0, n_phi)
        phi = math.pi + half[..., None] * t
        vals = np.abs(transverse_kernel_values(cfg, ks[..., None], ki[..., None], phi, optics)) ** 2
        return ks * ki * trapezoid(vals, t, axis=-1) * half

    return marginal


@dataclass(frozen=True, eq=False)
class TransverseSetup:
    """Precomputed samples of the transverse kernel on the support of the pump envelope.

    Only azimuth samples where the pump envelope can be non-negligible are kept; the
    remaining samples of the uniform ``n_phi`` grid are zero to double precision.
    """

    cfg: object
    grid: _grids.QuadratureGrid
    n_phi: int
    phi: np.ndarray
    samples: np.ndarray
    norm_t_perp: float
    tail_fraction: float
    m_max: int

    def harmonics(self, m_values):
        """Normalized ``T_m`` for the given integer orders, shape ``(len(m), N, N)``.

        ``T_m = int T(delta phi) exp(-i m delta phi) d(delta phi)``; the kernel depends
        on ``cos(delta phi)`` so the cosine transform over the symmetric support is used.
        """
        m_values = np.asarray(m_values)
        h = 2 * math.pi / self.n_phi
        basis = h * np.cos(np.outer(self.phi, m_values)) / self.norm_t_perp
        n = len(self.grid)
        flat = self.samples.reshape(n * n, -1)
        out = flat.real @ basis + 1j * (flat.imag @ basis)
        return np.moveaxis(out.reshape(n, n, m_values.size), -1, 0)

    def weighted_harmonics(self, m_values):
        """``sqrt(k_s k_i) T_m`` (the object that is Schmidt decomposed)."""
        k = self.grid.nodes
        return self.harmonics(m_values) * np.sqrt(np.outer(k, k))[None]

    def evaluate(self, k_s, k_i, delta_phi):
        """Normalized transverse kernel at arbitrary points."""
        return transverse_kernel_values(self.cfg, k_s, k_i, delta_phi) / self.norm_t_perp


def prepare_transverse(cfg, grid=None, m_max=None, optics=None, check=True):
    """Sample the transverse kernel for harmonic extraction.

    The azimuth grid is uniform with ``n_phi = azimuth_points(m_max)`` samples over
    ``[0, 2 pi)``; samples outside the pump-envelope support (amplitude below 1e-18
    of its peak) are dropped.
    """
    optics = optics or central_optics(cfg)
    grid = grid or radial_grid(cfg, optics)
    m_max = m_max if m_max is not None else default_m_max(cfg, optics)
    n_phi = azimuth_points(m_max)
    w = cfg.pump.beam_radius_wp
    L = cfg.crystal.length_L
    tail = 0.0
    if check:
        half = 0.5 * (grid.nodes[-1] - grid.nodes[0])
        center = 0.5 * (grid.nodes[-1] + grid.nodes[0])
        tail = ridge_tail_fraction(transverse_marginal_fn(cfg, optics), (center, center), half,
                                   across=10.0 / w, along_sign=1)
        if tail > cfg.grids.tail_tolerance:
            raise GridCoverageError(
                f"radial window holds only {1 - tail:.4f} of the kernel energy; widen it")
    k = grid.nodes
    kmin = max(k[0], 1.0 / w)
    phi_all = 2 * math.pi * np.arange(n_phi) / n_phi
    # pump amplitude bound exp(-w^2 kmin^2 (1 + cos) / 2) < 1e-18
    keep = (w * kmin) ** 2 * (1 + np.cos(phi_all)) / 2 < math.log(1e18)
    phi = phi_all[keep]
    samples = transverse_kernel_values(cfg, k[:, None, None], k[None, :, None], phi[None, None, :],
                                       optics)
    # full-angle norm: t_perp^2 = 2 pi int k_s k_i |T|^2 d(delta phi) dk_s dk_i
    h = 2 * math.pi / n_phi
    energy = h * np.sum(np.abs(samples) ** 2, axis=-1) * np.outer(k, k)
    norm = math.sqrt(2 * math.pi * float(grid.weights @ energy @ grid.weights))
    return TransverseSetup(cfg, grid, n_phi, phi, samples, norm, tail, m_max)


@dataclass(frozen=True, eq=False)
class AzimuthalKernelStack:
    """Normalized harmonics ``T_m`` for ``m = 0..m_max`` (``T_{-m} = T_m``)."""

    harmonics: np.ndarray
    grid: _grids.QuadratureGrid
    norm_t_perp: float
    m_max: int

    def harmonic(self, m):
        return self.harmonics[abs(m)]

    def weighted(self, m):
        k = self.grid.nodes
        return self.harmonics[abs(m)] * np.sqrt(np.outer(k, k))

    def energy(self, m):
        """``|| sqrt(k_s k_i) T_m ||^2`` under the radial quadrature."""
        w = self.grid.weights
        return float(w @ (np.abs(self.weighted(m)) ** 2) @ w)


def harmonic_energies(setup, m_values, chunk=64):
    """Quadrature norms of ``sqrt(k_s k_i) T_m`` for each ``m``."""
    w = setup.grid.weights
    out = []
    for start in range(0, len(m_values), chunk):
        block = setup.weighted_harmonics(m_values[start:start + chunk])
        out.append(np.einsum("i,mij,j->m", w, np.abs(block) ** 2, w))
    return np.concatenate(out)


def build_transverse_kernel_harmonics(cfg, grid=None, m_max=None, optics=None, check=True):
    """Azimuthal harmonic stack with the aliasing guard.

    Raises HarmonicTruncationError if the harmonic energy at ``|m| = m_max`` exceeds
    1e-6 of the total.
    """
    setup = prepare_transverse(cfg, grid, m_max, optics, check)
    m_max = m_max if m_max is not None else default_m_max(cfg, optics)
    harm = setup.harmonics(np.arange(m_max + 1))
    stack = AzimuthalKernelStack(harm, setup.grid, setup.norm_t_perp, m_max)
    check_harmonic_tail(stack.energy(m_max), stack.energy(0) + 2 * sum(
        stack.energy(m) for m in range(1, m_max + 1)))
    return stack


def check_harmonic_tail(edge_energy, total_energy):
    if edge_energy > 1e-6 * total_energy:
        raise HarmonicTruncationError(
            f"M_max too small: harmonic energy at the edge is {edge_energy / total_energy:.2e} of total")
