"""Quadrature grids for frequency, radial wave vector, azimuth, time and radius."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

AXIS_KINDS = ("frequency", "radial_wavevector", "azimuth", "time", "radius")


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Nodes and positive weights on one axis.

    For ``radius`` grids the weights already contain the ``r dr`` measure.
    """

    nodes: np.ndarray
    weights: np.ndarray
    axis_kind: str
    panel_nodes: int = 0

    def __post_init__(self):
        if self.axis_kind not in AXIS_KINDS:
            raise ValueError(f"unknown axis kind {self.axis_kind!r}")
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1D arrays of equal length")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if np.any(self.weights < 0) or (self.axis_kind != "radius" and np.any(self.weights <= 0)):
            raise ValueError("weights must be positive")
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self):
        return self.nodes.size

    @property
    def sqrt_weights(self):
        return np.sqrt(self.weights)

    def integrate(self, values, axis=-1):
        """Quadrature of sampled values along ``axis``."""
        return np.tensordot(np.moveaxis(np.asarray(values), axis, -1), self.weights, axes=([-1], [0]))


def gauss_legendre_nodes(a, b, n):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite_gauss_legendre(a, b, panels, panel_nodes):
    """Gauss-Legendre rule repeated over ``panels`` equal sub-intervals.

    With an odd number of panels and odd ``panel_nodes`` the interval midpoint is a node.
    """
    x, w = np.polynomial.legendre.leggauss(panel_nodes)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    if panels % 2 == 1 and panel_nodes % 2 == 1:
        # pin the midpoint exactly against rounding in the affine map
        nodes[nodes.size // 2] = 0.5 * (a + b)
    return nodes, weights


def build_grid(axis_kind, interval, resolution, panel_nodes=None):
    """Build a quadrature grid.

    Parameters
    ----------
    axis_kind : str
        One of ``frequency``, ``radial_wavevector``, ``azimuth``, ``time``, ``radius``.
    interval : tuple of float
        ``(lo, hi)``.  Azimuth grids are periodic over ``[lo, hi)``.
    resolution : int
        Number of nodes (at least 8).  Composite Gauss-Legendre grids round this up
        to an odd number of panels of ``panel_nodes`` nodes.
    panel_nodes : int, optional
        Nodes per Gauss-Legendre panel; ``None`` uses a single panel.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise ValueError(f"degenerate range {interval!r}")
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    if axis_kind in ("frequency", "radial_wavevector"):
        if panel_nodes is None:
            nodes, weights = gauss_legendre_nodes(lo, hi, resolution)
            panel_nodes = resolution
        else:
            panels = max(1, math.ceil(resolution / panel_nodes))
            if panels % 2 == 0:
                panels += 1
            nodes, weights = composite_gauss_legendre(lo, hi, panels, panel_nodes)
    elif axis_kind == "azimuth":
        h = (hi - lo) / resolution
        nodes = lo + h * np.arange(resolution)
        weights = np.full(resolution, h)
    elif axis_kind == "time":
        nodes = np.linspace(lo, hi, resolution)
        weights = np.full(resolution, nodes[1] - nodes[0])
        weights[0] *= 0.5
        weights[-1] *= 0.5
    elif axis_kind == "radius":
        nodes = np.linspace(lo, hi, resolution)
        h = nodes[1] - nodes[0]
        weights = np.full(resolution, h) * nodes
        weights[0] *= 0.5
        weights[-1] *= 0.5
    else:
        raise ValueError(f"unknown axis kind {axis_kind!r}")
    return QuadratureGrid(np.ascontiguousarray(nodes), np.ascontiguousarray(weights), axis_kind,
                          panel_nodes or 0)


def centered_grid(axis_kind, center, halfwidth, resolution, panel_nodes):
    """Composite Gauss-Legendre grid symmetric about ``center`` (which is a node)."""
    return build_grid(axis_kind, (center - halfwidth, center + halfwidth), resolution, panel_nodes)


def center_index(grid, center):
    """Index of the node closest to ``center``."""
    return int(np.argmin(np.abs(grid.nodes - center)))


def lagrange_matrix(x, y):
    """Values of the Lagrange basis on nodes ``x`` at points ``y``, shape ``(len(x), len(y))``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.ones((x.size, y.size))
    for j in range(x.size):
        for k in range(x.size):
            if k != j:
                out[j] *= (y - x[k]) / (x[j] - x[k])
    return out


@dataclass(frozen=True, eq=False)
class PanelRefinement:
    """Finer Gauss-Legendre rule on every panel of a composite grid.

    ``fine_nodes`` and ``fine_weights`` have shape ``(panels, n_fine)``; ``basis`` maps
    the ``panel_nodes`` samples of a panel to its fine nodes.
    """

    fine_nodes: np.ndarray
    fine_weights: np.ndarray
    basis: np.ndarray

    def transform(self, fine_kernel):
        """Coarse-node quadrature matrix from kernel values ``(panels, n_fine, n_out)``."""
        weighted = self.fine_weights[:, :, None] * fine_kernel
        out = np.einsum("pf,bfo->bpo", self.basis, weighted)
        return out.reshape(-1, fine_kernel.shape[-1])


def panel_refinement(grid, max_phase_rate=0.0, min_nodes=0):
    """Refined rule integrating kernels oscillating up to ``max_phase_rate`` per unit.

    The fine rule integrates the panel-wise interpolant of the coarse samples, so
    oscillatory kernels far beyond the coarse node spacing are integrated exactly
    for that interpolant.
    """
    p = grid.panel_nodes
    if p <= 0 or len(grid) % p:
        raise ValueError("grid has no panel structure")
    panels = len(grid) // p
    x = grid.nodes.reshape(panels, p)
    half = 0.5 * grid.weights.reshape(panels, p).sum(axis=1)
    mid = x.mean(axis=1)
    nf = max(p, min_nodes, int(math.ceil(max_phase_rate * float(half.max()))) + 16)
    tf, wf = np.polynomial.legendre.leggauss(nf)
    ref, _ = np.polynomial.legendre.leggauss(p)
    basis = lagrange_matrix(ref, tf)
    fine_nodes = mid[:, None] + half[:, None] * tf[None, :]
    fine_weights = half[:, None] * wf[None, :]
    return PanelRefinement(fine_nodes, fine_weights, basis)


def refined_transform(grid, kernel, max_phase_rate=0.0, min_nodes=0):
    """Quadrature matrix for ``int f(x) kernel(x, .) dx`` with ``f`` known on ``grid``.

    Parameters
    ----------
    grid : QuadratureGrid
        Composite Gauss-Legendre grid (``panel_nodes`` set).
    kernel : callable
        ``kernel(x_fine)`` returns an array of shape ``(len(x_fine), n_out)``.
    max_phase_rate : float
        Largest ``|d phase / dx|`` of the kernel, used to size the fine rule.
    min_nodes : int
        Lower bound on fine nodes per panel.

    Returns
    -------
    ndarray, shape ``(len(grid), n_out)``
        ``f @ E`` approximates the transform.
    """
    ref = panel_refinement(grid, max_phase_rate, min_nodes)
    values = kernel(ref.fine_nodes.ravel())
    return ref.transform(values.reshape(ref.fine_nodes.shape + (values.shape[-1],)))
