"""Per-mode parametric gain, photon numbers and the sinh-squared gain parametrization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

MAX_GAIN = 300.0


class GainRangeError(OverflowError):
    pass


@dataclass(frozen=True)
class GainFactors:
    U: np.ndarray
    V: np.ndarray


def coupling_constants(t_perp, f_par, lam_perp, lam_par, length):
    """``K_{ml,q} = (t_perp f_par / L) lam_perp[ml] lam_par[q]`` as a 2D array."""
    if not (t_perp > 0 and f_par > 0):
        raise ValueError("kernel norms must be positive")
    return (t_perp * f_par / length) * np.outer(lam_perp, lam_par)


def evolve(K, length):
    """``U = cosh(K L)``, ``V = sinh(K L)``."""
    x = np.asarray(K, dtype=float) * length
    if not np.all(np.isfinite(x)):
        raise GainRangeError("non-finite coupling")
    if np.any(np.abs(x) > MAX_GAIN):
        raise GainRangeError("gain out of numeric range")
    return GainFactors(np.cosh(x), np.sinh(x))


@dataclass(frozen=True, eq=False)
class GainState:
    """Twin-beam state in factorized form.

    The gain argument of mode ``(ml, q)`` is ``coupling * perp[ml] * par[q]``.
    ``perp_weight`` counts how many transverse modes each ``perp`` entry stands for
    (azimuthal degeneracy, or histogram counts in the quasi-continuum form).
    """

    perp: np.ndarray
    par: np.ndarray
    coupling: float
    pump_power: float
    perp_weight: np.ndarray | None = None

    def __post_init__(self):
        if self.perp_weight is None:
            object.__setattr__(self, "perp_weight", np.ones_like(self.perp))
        if self.coupling * float(np.max(self.perp)) * float(np.max(self.par)) > MAX_GAIN:
            raise GainRangeError("gain out of numeric range")

    @property
    def coupling_scale(self):
        return self.coupling

    def gain_argument(self, rows=slice(None)):
        return self.coupling * np.outer(self.perp[rows], self.par)

    @property
    def U(self):
        return np.cosh(self.gain_argument())

    @property
    def V(self):
        return np.sinh(self.gain_argument())

    @property
    def top_gain(self):
        """Gain argument of the strongest mode."""
        return self.coupling * float(np.max(self.perp)) * float(np.max(self.par))

    def row_blocks(self, size=512):
        """Yield ``(weight, V^2, U V)`` in blocks of transverse entries."""
        for start in range(0, self.perp.size, size):
            x = self.gain_argument(slice(start, start + size))
            yield self.perp_weight[start:start + size], np.sinh(x) ** 2, 0.5 * np.sinh(2 * x)

    def col_blocks(self, size=256):
        """Yield ``(ones, V^2, U V)`` in blocks of spectral modes, shaped ``(q, transverse)``."""
        for start in range(0, self.par.size, size):
            x = self.coupling * np.outer(self.par[start:start + size], self.perp)
            yield np.ones(x.shape[0]), np.sinh(x) ** 2, 0.5 * np.sinh(2 * x)

    def with_power(self, power, reference_power):
        scale = math.sqrt(power / reference_power)
        return GainState(self.perp, self.par, self.coupling * scale, power, self.perp_weight)


def photon_number(state):
    """Mean number of signal photons ``sum V^2``."""
    total = 0.0
    for w, v2, _ in state.row_blocks():
        total += float(w @ v2.sum(axis=1))
    return total


def mode_photon_numbers(state):
    """``V^2`` summed over transverse entries (weighted), per spectral mode."""
    out = np.zeros(state.par.size)
    for w, v2, _ in state.row_blocks():
        out += w @ v2
    return out


def transverse_photon_numbers(state):
    """``V^2`` summed over spectral modes, per transverse entry (unweighted)."""
    out = np.empty(state.perp.size)
    start = 0
    for _, v2, _ in state.row_blocks():
        out[start:start + v2.shape[0]] = v2.sum(axis=1)
        start += v2.shape[0]
    return out


@dataclass(frozen=True)
class GainFit:
    """``N_s = N_s0 sinh(g0 sqrt(P))^2``."""

    N_s0: float
    g0: float
    residual: float
    max_deviation: float

    def g(self, power):
        return self.g0 * np.sqrt(power)

    def photon_number(self, power):
        return self.N_s0 * np.sinh(self.g(power)) ** 2


def _log_sinh2(x):
    # log(sinh(x)^2) without overflow
    x = np.asarray(x, dtype=float)
    return 2 * (x + np.log1p(-np.exp(-2 * x)) - math.log(2.0))


def fit_gain(powers, photon_numbers):
    """Least-squares fit of ``log N_s`` to ``log(N_s0 sinh(g0 sqrt(P))^2)``.

    ``residual`` is the RMS of the relative deviation between fitted and given
    photon numbers; ``max_deviation`` its maximum.
    """
    p = np.asarray(powers, dtype=float)
    n = np.asarray(photon_numbers, dtype=float)
    if p.size < 5 or p.max() / p.min() < 100:
        raise ValueError("need at least five points spanning two decades")
    if np.any(n <= 0):
        raise ValueError("photon numbers must be positive")
    y = np.log(n)
    sq = np.sqrt(p)
    # start: top point sets g0 by the large-gain slope of log N against sqrt(P)
    slope = (y[-1] - y[-2]) / (sq[-1] - sq[-2])
    g0_start = max(slope / 2, 1e-3 / sq.max())

    def resid(params):
        log_n0, log_g0 = params
        return log_n0 + _log_sinh2(math.exp(log_g0) * sq) - y

    log_n0_start = float(np.median(y - _log_sinh2(g0_start * sq)))
    sol = optimize.least_squares(resid, [log_n0_start, math.log(g0_start)], method="lm",
                                 xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=10000)
    if not sol.success:
        raise RuntimeError(f"gain fit did not converge: {sol.message}")
    rel = np.expm1(sol.fun)
    return GainFit(float(math.exp(sol.x[0])), float(math.exp(sol.x[1])),
                   float(np.sqrt(np.mean(rel**2))), float(np.max(np.abs(rel))))
