"""Closed-form references used by the tests."""

import math

import numpy as np

from twinbeam.grids import build_grid


def hermite_functions(n, x):
    """Orthonormal Hermite functions ``psi_0..psi_{n-1}`` by the stable recurrence."""
    out = np.empty((n, x.size))
    out[0] = math.pi**-0.25 * np.exp(-x * x / 2)
    if n > 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for k in range(1, n - 1):
        out[k + 1] = math.sqrt(2.0 / (k + 1)) * x * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return out


def mehler_kernel(t, half_width=12.0, points=241):
    """Double-Gaussian kernel with Schmidt weights ``t^n sqrt(1 - t^2)``.

    ``exp(-(x^2 + y^2)(1 + t^2) / (2(1 - t^2)) + 2 x y t / (1 - t^2))
    = sqrt(pi (1 - t^2)) sum_n t^n psi_n(x) psi_n(y)``.
    """
    g = build_grid("frequency", (-half_width, half_width), points)
    x = g.nodes
    d = 1.0 - t * t
    k = np.exp(-(x[:, None] ** 2 + x[None, :] ** 2) * (1 + t * t) / (2 * d) + 2 * t * np.outer(x, x) / d)
    return g, k


def mehler_eigenvalues(t, n):
    return t ** np.arange(n) * math.sqrt(1 - t * t)
