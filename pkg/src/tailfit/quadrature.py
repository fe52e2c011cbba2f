"""Adaptive 2-D Gauss-Legendre quadrature over axis-aligned rectangles.

Integrands built from min/max of the coordinates have a derivative kink on
the diagonal y = x, so rectangles straddling the diagonal are split into the
regions below and above it before integrating.  Each region is mapped onto
the unit square and integrated with a tensor Gauss-Legendre rule; panels are
subdivided until two rule orders agree to the requested relative tolerance.
"""

from functools import lru_cache

import numpy as np

_LO_ORDER = 12
_HI_ORDER = 24
_MAX_DEPTH = 14


@lru_cache(maxsize=None)
def _gl_nodes(n):
    x, w = np.polynomial.legendre.leggauss(n)
    # rescale from [-1, 1] to [0, 1]
    return 0.5 * (x + 1.0), 0.5 * w


def _tensor_estimate(h, s0, s1, t0, t1, order):
    xs, wx = _gl_nodes(order)
    s = s0 + (s1 - s0) * xs
    t = t0 + (t1 - t0) * xs
    ss, tt = np.meshgrid(s, t, indexing="ij")
    vals = h(ss.ravel(), tt.ravel()).reshape(order, order)
    return (s1 - s0) * (t1 - t0) * (wx @ vals @ wx)


def _adapt(h, s0, s1, t0, t1, abs_tol, depth):
    lo = _tensor_estimate(h, s0, s1, t0, t1, _LO_ORDER)
    hi = _tensor_estimate(h, s0, s1, t0, t1, _HI_ORDER)
    if abs(hi - lo) <= abs_tol or depth >= _MAX_DEPTH:
        return hi
    sm = 0.5 * (s0 + s1)
    tm = 0.5 * (t0 + t1)
    q = abs_tol / 4.0
    return (
        _adapt(h, s0, sm, t0, tm, q, depth + 1)
        + _adapt(h, sm, s1, t0, tm, q, depth + 1)
        + _adapt(h, s0, sm, tm, t1, q, depth + 1)
        + _adapt(h, sm, s1, tm, t1, q, depth + 1)
    )


def _unit_square_integral(h, rel_tol):
    rough = _tensor_estimate(h, 0.0, 1.0, 0.0, 1.0, _HI_ORDER)
    abs_tol = rel_tol * max(abs(rough), 1e-300)
    return _adapt(h, 0.0, 1.0, 0.0, 1.0, abs_tol, 0)


def _region_maps(f, a, b, c, d):
    """Unit-square maps for the sub-rectangle regions below and above y = x.

    The x-range of each region is cut where the diagonal leaves the
    rectangle, so every returned map is smooth wherever f is.
    """
    maps = []
    # below the diagonal: x in [max(a, c), b], y in [c, min(x, d)]
    x0 = max(a, c)
    for lo, hi in _pieces(x0, b, d):
        def h(s, t, lo=lo, hi=hi):
            x = lo + s * (hi - lo)
            ytop = np.minimum(x, d)
            y = c + t * (ytop - c)
            return f(x, y) * (hi - lo) * (ytop - c)

        maps.append(h)
    # above the diagonal: x in [a, min(b, d)], y in [max(x, c), d]
    x1 = min(b, d)
    for lo, hi in _pieces(a, x1, c):
        def h(s, t, lo=lo, hi=hi):
            x = lo + s * (hi - lo)
            ybot = np.maximum(x, c)
            y = ybot + t * (d - ybot)
            return f(x, y) * (hi - lo) * (d - ybot)

        maps.append(h)
    return maps


def _pieces(lo, hi, brk):
    if hi <= lo:
        return []
    if lo < brk < hi:
        return [(lo, brk), (brk, hi)]
    return [(lo, hi)]


def _panel_1d(f, a, b, order):
    xs, w = _gl_nodes(order)
    return (b - a) * (w @ f(a + (b - a) * xs))


def _adapt_1d(f, a, b, abs_tol, depth):
    lo = _panel_1d(f, a, b, 15)
    hi = _panel_1d(f, a, b, 31)
    if abs(hi - lo) <= abs_tol or depth >= _MAX_DEPTH:
        return hi
    m = 0.5 * (a + b)
    return _adapt_1d(f, a, m, abs_tol / 2.0, depth + 1) + _adapt_1d(
        f, m, b, abs_tol / 2.0, depth + 1
    )


def integrate_1d(f, a, b, rel_tol=1e-9):
    """Adaptive Gauss-Legendre integral of a vectorized f on [a, b]."""
    if b <= a:
        return 0.0
    rough = _panel_1d(f, a, b, 31)
    return _adapt_1d(f, a, b, rel_tol * max(abs(rough), 1e-300), 0)


def integrate_rect(f, a, b, c, d, rel_tol=1e-9, split_diagonal=True):
    """Integrate a vectorized f(x, y) over [a, b] x [c, d].

    With split_diagonal the rectangle is cut along y = x whenever it
    straddles the diagonal; f only ever sees points inside one region.
    """
    if b <= a or d <= c:
        return 0.0
    straddles = split_diagonal and (b > c and d > a)
    if not straddles:
        def h(s, t):
            return f(a + s * (b - a), c + t * (d - c)) * (b - a) * (d - c)
        return _unit_square_integral(h, rel_tol)
    return sum(_unit_square_integral(h, rel_tol) for h in _region_maps(f, a, b, c, d))
