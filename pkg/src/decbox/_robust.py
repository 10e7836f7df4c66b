"""Error-free float64 transformations for the cotangent weights.

On sliver triangles the corner cotangent ``(a . b) / (a x b)`` suffers from
cancellation in ``a x b``. Carrying the edge vectors and products as
unevaluated sums of two doubles keeps the result within an ulp or two.
"""

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _product(a, b):
    # (a_hi + a_lo)(b_hi + b_lo) as hi + lo, dropping terms of order eps^2
    p, e = two_prod(a[0], b[0])
    return p, e + (a[0] * b[1] + a[1] * b[0])


def _add(x, y):
    s, t = two_sum(x[0], y[0])
    return s, t + x[1] + y[1]


def edge_vector(p, q):
    """``q - p`` for (..., 2) coordinate arrays, as exact (hi, lo) pairs per axis."""
    return two_sum(q[..., 0], -p[..., 0]), two_sum(q[..., 1], -p[..., 1])


def dot(a, b):
    hi, lo = _add(_product(a[0], b[0]), _product(a[1], b[1]))
    return hi + lo


def cross(a, b):
    neg = _product(a[1], b[0])
    hi, lo = _add(_product(a[0], b[1]), (-neg[0], -neg[1]))
    return hi + lo


def half_cotangents(corners):
    """``cot(theta_p) / 2`` at the three corners of each triangle in (m, 3, 2) ``corners``,
    together with the doubled signed areas."""
    corners = np.asarray(corners, dtype=float)
    e01 = edge_vector(corners[:, 0], corners[:, 1])
    e02 = edge_vector(corners[:, 0], corners[:, 2])
    twice_area = cross(e01, e02)
    out = np.empty(corners.shape[:1] + (3,))
    for p in range(3):
        a = edge_vector(corners[:, p], corners[:, (p + 1) % 3])
        b = edge_vector(corners[:, p], corners[:, (p + 2) % 3])
        out[:, p] = dot(a, b) / (2.0 * twice_area)
    return out, twice_area
