"""Bessel functions of the first kind for integer orders up to several thousand.

Values come from Miller's downward recurrence normalized with
``J_0 + 2 sum_k J_2k = 1``.  The recurrence is stable downward for every argument,
so one pass yields all orders ``0..m_max`` at once.  Running values are rescaled
elementwise before they overflow.  Arguments below ``SMALL`` use the two-term
power series, which is exact to rounding there.
"""

from __future__ import annotations

import math

import numpy as np

_BIG = 1e250
_LOG_BIG = math.log(_BIG)
SMALL = 1e-8


def start_order(m_max, x_max):
    """Even starting order safely above both the requested order and the argument."""
    n = max(int(m_max), int(math.ceil(x_max)))
    start = n + int(math.ceil(math.sqrt(40.0 * (n + 1)))) + 20
    return start + (start % 2)


def _recurrence(m_max, x, totals):
    """Run the recurrence from the start order down to 0.

    Yields ``(n, v, count)`` for ``n <= m_max`` with the unnormalized value ``v`` and
    the number of rescalings ``count`` applied so far.  On exhaustion ``totals``
    holds the normalization sum and the final rescaling count.
    """
    top = start_order(m_max, float(np.max(x)) if x.size else 0.0)
    two_over_x = 2.0 / np.where(x >= SMALL, x, 1.0)
    nxt = np.zeros(x.shape)
    cur = np.full(x.shape, 1e-300)
    count = np.zeros(x.shape, dtype=np.int64)
    norm = np.zeros(x.shape)
    for n in range(top, 0, -1):
        if n <= m_max:
            yield n, cur, count
        if n % 2 == 0:
            norm += 2.0 * cur
        nxt, cur = cur, n * two_over_x * cur - nxt
        big = np.abs(cur) > _BIG
        if big.any():
            cur = np.where(big, cur / _BIG, cur)
            nxt = np.where(big, nxt / _BIG, nxt)
            norm = np.where(big, norm / _BIG, norm)
            count = count + big
    yield 0, cur, count
    totals["norm"] = norm + cur
    totals["count"] = count


def _series(n, x):
    half = 0.5 * x
    with np.errstate(under="ignore"):
        lead = np.exp(n * np.log(np.where(half > 0, half, 1.0)) - math.lgamma(n + 1))
        lead = np.where(half > 0, lead, 1.0 if n == 0 else 0.0)
    return lead * (1.0 - half * half / (n + 1))


def _normalized(n, v, count, totals, x):
    # values rescaled fewer times than the final sum are smaller by BIG per step
    lag = count - totals["count"]
    out = v * np.exp(lag * _LOG_BIG) / totals["norm"]
    small = x < SMALL
    if np.any(small):
        out = np.where(small, _series(n, x), out)
    return out


def _check(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("arguments must be finite and non-negative")
    return x


def bessel_j_all(m_max, x):
    """``J_m(x)`` for ``m = 0..m_max``; shape ``(m_max + 1,) + x.shape``.

    Parameters
    ----------
    m_max : int
    x : array_like
        Non-negative arguments.
    """
    x = _check(x)
    raw = np.empty((m_max + 1,) + x.shape)
    counts = np.empty((m_max + 1,) + x.shape, dtype=np.int64)
    totals = {}
    for n, v, count in _recurrence(m_max, x, totals):
        raw[n] = v
        counts[n] = count
    for n in range(m_max + 1):
        raw[n] = _normalized(n, raw[n], counts[n], totals, x)
    return raw


def bessel_j_descending(m_max, x):
    """Yield ``(m, J_m(x))`` for ``m = m_max, m_max - 1, ..., 0``.

    Memory stays at a few copies of ``x``; the recurrence runs twice, once for the
    normalization and once to emit values.
    """
    x = _check(x)
    totals = {}
    for _ in _recurrence(m_max, x, totals):
        pass
    for n, v, count in _recurrence(m_max, x, {}):
        yield n, _normalized(n, v, count, totals, x)


def bessel_j(m, x):
    """``J_m(x)`` for a single non-negative integer order."""
    return bessel_j_all(int(m), x)[int(m)]
