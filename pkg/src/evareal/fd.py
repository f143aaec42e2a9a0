"""Second-order finite-difference stencils used by the diagnostics and norms."""

from __future__ import annotations

import numpy as np


def d_periodic(arr, h, axis=0):
    """Centered first derivative with periodic wrap."""
    up = np.roll(arr, -1, axis=axis)
    dn = np.roll(arr, 1, axis=axis)
    return (up - dn) / (2.0 * h)


def d2_periodic(arr, h, axis=0):
    """Centered second derivative with periodic wrap."""
    up = np.roll(arr, -1, axis=axis)
    dn = np.roll(arr, 1, axis=axis)
    return (up - 2.0 * arr + dn) / (h * h)


def d_bounded(arr, h, axis=0):
    """Centered first derivative, one-sided at the two boundary rows."""
    arr = np.asarray(arr, dtype=float)
    out = np.empty_like(arr)
    sl = [slice(None)] * arr.ndim

    def ax(s):
        sl2 = list(sl)
        sl2[axis] = s
        return tuple(sl2)

    out[ax(slice(1, -1))] = (arr[ax(slice(2, None))] - arr[ax(slice(0, -2))]) / (2.0 * h)
    out[ax(0)] = (arr[ax(1)] - arr[ax(0)]) / h
    out[ax(-1)] = (arr[ax(-1)] - arr[ax(-2)]) / h
    return out


def ddt_three_point(ts, vals):
    """Derivative of a sampled time series at its newest sample.

    Fits the quadratic through the last three (t, value) pairs and
    differentiates it at the final time; second-order accurate on
    non-uniform spacing.  `vals` may be an array of shape (3, ...).
    """
    t1, t2, t3 = ts
    v1, v2, v3 = vals
    c1 = (t3 - t2) / ((t1 - t2) * (t1 - t3))
    c2 = (t3 - t1) / ((t2 - t1) * (t2 - t3))
    c3 = (2.0 * t3 - t1 - t2) / ((t3 - t1) * (t3 - t2))
    return c1 * v1 + c2 * v2 + c3 * v3
