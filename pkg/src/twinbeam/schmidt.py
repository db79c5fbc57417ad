"""Measure-correct Schmidt decompositions and eigenvalue bookkeeping.

A kernel sampled on quadrature grids is decomposed through the SVD of
``diag(sqrt(w_row)) K diag(sqrt(w_col))``; singular vectors divided by ``sqrt(w)``
are mode functions orthonormal under the quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .grids import QuadratureGrid


class TruncationWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """Schmidt eigenvalues and mode functions.

    ``signal_modes[q]`` and ``idler_modes[q]`` sample ``f_s,q`` and ``f_i,q`` on the row and
    column grids so that ``K(x, y) ~ sum_q scale * eigenvalues[q] f_s,q(x) f_i,q(y)``.
    ``scale`` is the kernel norm (one for a normalized kernel).
    """

    eigenvalues: np.ndarray
    signal_modes: np.ndarray | None
    idler_modes: np.ndarray | None
    grid_s: QuadratureGrid
    grid_i: QuadratureGrid
    residual: float
    scale: float = 1.0

    @property
    def schmidt_number(self):
        return participation_ratio(self.eigenvalues**2)

    def reconstruct(self, rows=None, cols=None):
        """Normalized kernel rebuilt from the retained modes."""
        fs = self.signal_modes if rows is None else self.signal_modes[:, rows]
        fi = self.idler_modes if cols is None else self.idler_modes[:, cols]
        return (fs.T * self.eigenvalues) @ fi


def participation_ratio(weights):
    """``(sum w)^2 / sum w^2`` for non-negative weights."""
    w = np.asarray(weights, dtype=float)
    s2 = float(np.sum(w * w))
    if s2 == 0.0:
        raise ValueError("participation ratio of an all-zero weight vector")
    return float(np.sum(w)) ** 2 / s2


def fix_phases(fs, fi):
    """Make the largest-magnitude sample of each signal mode real and positive.

    The idler mode takes the conjugate phase so ``f_s f_i`` is unchanged.
    """
    idx = np.argmax(np.abs(fs), axis=1)
    ph = fs[np.arange(fs.shape[0]), idx]
    ph = ph / np.abs(ph)
    ph[~np.isfinite(ph)] = 1.0
    return fs * ph.conj()[:, None], fi * ph[:, None]


def keep_count(values, threshold):
    """Number of leading (descending) values at or above ``threshold``.

    Members of a cluster tied with the last kept value are kept as well.
    """
    n = int(np.searchsorted(-values, -threshold, side="right"))
    if 0 < n < values.size:
        last = values[n - 1]
        while n < values.size and abs(values[n] - last) <= 1e-12 * last:
            n += 1
    return n


def weighted_svd(kernel, row_weights, col_weights, compute_modes=True):
    """SVD of ``sqrt(w_r) K sqrt(w_c)``; returns ``(s, U, Vh)`` (``U``/``Vh`` None when skipped)."""
    sr = np.sqrt(row_weights)
    sc = np.sqrt(col_weights)
    d = kernel * sr[:, None] * sc[None, :]
    if not np.all(np.isfinite(d)):
        raise FloatingPointError("non-finite kernel entries")
    if compute_modes:
        u, s, vh = linalg.svd(d, full_matrices=False, lapack_driver="gesdd", check_finite=False)
        return s, u, vh
    s = linalg.svd(d, compute_uv=False, lapack_driver="gesdd", check_finite=False)
    return s, None, None


def decompose(kernel, row_grid, col_grid, cutoff=0.0, compute_modes=True, normalize=True):
    """Schmidt decomposition of a sampled kernel.

    Parameters
    ----------
    kernel : ndarray, shape (n_row, n_col)
        Complex kernel samples.
    row_grid, col_grid : QuadratureGrid
    cutoff : float
        Modes with eigenvalue below ``cutoff * max eigenvalue`` are dropped.
    normalize : bool
        Rescale eigenvalues so that their squares sum to one over all singular values.
    """
    kernel = np.asarray(kernel)
    if kernel.shape != (len(row_grid), len(col_grid)):
        raise ValueError("kernel shape does not match the grids")
    s, u, vh = weighted_svd(kernel, row_grid.weights, col_grid.weights, compute_modes)
    total = float(np.sqrt(np.sum(s * s)))
    if total == 0.0:
        raise FloatingPointError("kernel has zero norm")
    lam = s / total if normalize else s
    n = keep_count(lam, cutoff * lam[0]) if cutoff > 0 else lam.size
    residual = float(np.sqrt(max(np.sum(s[n:] ** 2), 0.0))) / total
    fs = fi = None
    if compute_modes:
        fs = u[:, :n].T / np.sqrt(row_grid.weights)[None, :]
        fi = vh[:n, :] / np.sqrt(col_grid.weights)[None, :]
        fs, fi = fix_phases(fs, fi)
    return SchmidtDecomposition(lam[:n].copy(), fs, fi, row_grid, col_grid, residual,
                                total if normalize else 1.0)


# ---------------------------------------------------------------------------
# transverse decompositions over azimuthal orders

@dataclass(frozen=True, eq=False)
class TransverseModes:
    """Retained transverse Schmidt modes, one entry per ``(m, l)`` with ``m >= 0``.

    The ``-m`` partner of every ``m > 0`` entry shares its eigenvalue and radial
    functions; ``multiplicity`` is 2 for those entries and 1 for ``m = 0``.
    Radial functions ``u`` are orthonormal under ``dk`` and the full far-field mode is
    ``u(k) exp(+-i m phi) / sqrt(2 pi)``.
    """

    m: np.ndarray
    l: np.ndarray
    eigenvalues: np.ndarray
    signal: np.ndarray | None
    idler: np.ndarray | None
    grid: QuadratureGrid
    truncation_loss: float
    norm_t_perp: float

    @property
    def multiplicity(self):
        return np.where(self.m == 0, 1, 2)

    @property
    def mode_count(self):
        return int(np.sum(self.multiplicity))

    def expanded(self):
        """``(m, l, lambda)`` for every mode including negative ``m``, sorted by ``(m, l)``."""
        neg = self.m > 0
        m = np.concatenate([-self.m[neg][::-1], self.m])
        l = np.concatenate([self.l[neg][::-1], self.l])
        lam = np.concatenate([self.eigenvalues[neg][::-1], self.eigenvalues])
        order = np.lexsort((l, m))
        return m[order], l[order], lam[order]

    def for_m(self, m):
        sel = np.nonzero(self.m == abs(m))[0]
        return sel


class TransverseAccumulator:
    """Collects per-``m`` decompositions and applies the global cutoff at the end."""

    def __init__(self, grid, norm_t_perp, cutoff, keep_modes=True):
        self.grid = grid
        self.norm = norm_t_perp
        self.cutoff = cutoff
        self.keep_modes = keep_modes
        self.blocks = []
        self.total_energy = 0.0
        self.peak = 0.0
        self.energies = {}

    def add(self, m, s, u=None, vh=None):
        """Add singular values (and vectors) of ``sqrt(w) sqrt(k k) T_m sqrt(w)``."""
        mult = 1 if m == 0 else 2
        energy = float(np.sum(s * s))
        self.energies[m] = energy
        self.total_energy += mult * energy
        self.peak = max(self.peak, float(s[0]))
        n = keep_count(s, self.cutoff * self.peak)
        if n == 0:
            return 0
        block = [m, s[:n].copy(), None, None]
        if self.keep_modes and u is not None:
            sw = np.sqrt(self.grid.weights)
            fs = u[:, :n].T / sw[None, :]
            fi = vh[:n, :] / sw[None, :]
            block[2], block[3] = fix_phases(fs, fi)
        self.blocks.append(block)
        return n

    def finish(self, warn_loss=1e-3):
        thr = self.cutoff * self.peak
        ms, ls, lams, fss, fis = [], [], [], [], []
        for m, s, fs, fi in self.blocks:
            n = keep_count(s, thr)
            if n == 0:
                continue
            ms.append(np.full(n, m))
            ls.append(np.arange(n))
            lams.append(s[:n])
            if fs is not None:
                fss.append(fs[:n])
                fis.append(fi[:n])
        m = np.concatenate(ms)
        l = np.concatenate(ls)
        lam = np.concatenate(lams)
        mult = np.where(m == 0, 1, 2)
        kept = float(np.sum(mult * lam * lam))
        loss = 1.0 - kept / self.total_energy if self.total_energy > 0 else 0.0
        if loss > warn_loss:
            warnings.warn(f"transverse truncation discards {loss:.2e} of the kernel energy",
                          TruncationWarning, stacklevel=2)
        lam = lam / math.sqrt(kept)
        order = np.lexsort((l, m))
        sig = np.concatenate(fss)[order] if fss else None
        idl = np.concatenate(fis)[order] if fis else None
        return TransverseModes(m[order], l[order], lam[order], sig, idl, self.grid, loss, self.norm)


def decompose_all_transverse(source, cutoff=1e-4, m_values=None, compute_modes=True, chunk=32,
                             progress=None):
    """Decompose ``sqrt(k_s k_i) T_m`` for every order and collect the retained modes.

    Parameters
    ----------
    source : AzimuthalKernelStack or TransverseSetup
        A stored harmonic stack, or a sampled kernel from which harmonics are
        generated chunk by chunk (for large ``m`` ranges).
    cutoff : float
        Relative eigenvalue cutoff against the largest transverse eigenvalue.
    m_values : sequence of int, optional
        Non-negative orders; defaults to ``0..m_max`` of a stack.
    """
    grid = source.grid
    acc = TransverseAccumulator(grid, source.norm_t_perp, cutoff, compute_modes)
    w = grid.weights
    if hasattr(source, "harmonics") and callable(source.harmonics):
        if m_values is None:
            m_values = np.arange(source.m_max + 1)
        m_values = np.asarray(m_values)
        for start in range(0, m_values.size, chunk):
            block_m = m_values[start:start + chunk]
            block = source.weighted_harmonics(block_m)
            for m, mat in zip(block_m, block):
                s, u, vh = weighted_svd(mat, w, w, compute_modes)
                acc.add(int(m), s, u, vh)
            if progress:
                progress(int(block_m[-1]))
    else:
        if m_values is None:
            m_values = np.arange(source.m_max + 1)
        for m in m_values:
            s, u, vh = weighted_svd(source.weighted(int(m)), w, w, compute_modes)
            acc.add(int(m), s, u, vh)
    return acc.finish()


# ---------------------------------------------------------------------------
# quasi-continuum eigenvalue density

@dataclass(frozen=True, eq=False)
class EigenvalueDensity:
    """Histogram density of transverse eigenvalues.

    Bins span ``[0, lambda_max]``.  ``nodes`` holds the mean eigenvalue of each occupied
    bin and ``counts`` its number of modes; these are the quadrature nodes and
    weights used in place of explicit mode sums.
    """

    bin_edges: np.ndarray
    density: np.ndarray
    total_mode_count: int
    nodes: np.ndarray
    counts: np.ndarray
    mean_square: np.ndarray

    def integrate(self, func):
        """``int rho(lambda) func(lambda) d lambda`` by the bin-mean rule."""
        return float(np.sum(self.counts * func(self.nodes)))


def eigenvalue_density(eigenvalues, multiplicity=None, bins=200, upper=None):
    """Histogram density of eigenvalues with occupied-bin means.

    Parameters
    ----------
    eigenvalues : array_like
    multiplicity : array_like, optional
        Number of modes each entry stands for (2 for ``+-m`` pairs).
    bins : int
    upper : float, optional
        Upper bin edge; defaults to the largest eigenvalue.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size == 0:
        raise ValueError("no retained modes")
    mult = np.ones_like(lam) if multiplicity is None else np.asarray(multiplicity, dtype=float)
    top = float(upper if upper is not None else lam.max())
    edges = np.linspace(0.0, top, bins + 1)
    idx = np.clip(np.searchsorted(edges, lam, side="right") - 1, 0, bins - 1)
    counts = np.bincount(idx, weights=mult, minlength=bins)
    sums = np.bincount(idx, weights=mult * lam, minlength=bins)
    sq = np.bincount(idx, weights=mult * lam * lam, minlength=bins)
    occupied = counts > 0
    nodes = sums[occupied] / counts[occupied]
    mean_sq = sq[occupied] / counts[occupied]
    density = counts / np.diff(edges)
    return EigenvalueDensity(edges, density, int(round(mult.sum())), nodes, counts[occupied], mean_sq)
