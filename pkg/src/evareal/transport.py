"""Semi-Lagrangian kinetic transport along the particle characteristics.

One time level of advection moves f by tracing each arrival node backward
along the characteristic flow

    dR/ds = alpha = e^(mu-lambda) w / V,
    dW/ds = -beta = -(lambda_dot w + e^(mu-lambda) mu' V),

with an RK2 midpoint rule, then sampling the old distribution at the
departure point by bilinear interpolation in (r, w): periodic wrap in r,
zero extension in w (particles outside the grid carry no matter).  F is an
exact invariant of the flow, so each F-slice is an independent 2D problem.

The distribution itself is sampled with quasi-monotone cubic interpolation:
a 4x4 Lagrange stencil whose result is clipped into the value range of the
surrounding 2x2 cell.  The clip keeps the update inside the convex hull of
neighbouring values -- positivity and the maximum principle hold exactly,
as for plain bilinear sampling -- while the cubic accuracy stops the
step-by-step accumulation of interpolation error from degrading the global
order (bilinear loses one order when dt is refined together with the grid).
Near the momentum-grid edge, where the cubic stencil does not fit, sampling
falls back to bilinear; the matter vanishes there by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kinematics import v_factor
from .phasespace import DistributionFn, PhaseSpaceGrid

__all__ = ["TransportCoefficients", "transport_coefficients", "trace_back", "advect"]


@dataclass
class TransportCoefficients:
    """alpha, beta tables on the phase-space grid at one time level.

    w_nodes holds the physical momentum nodes of that level (the grid
    contracts with time, so two levels carry different node sets).
    """

    t: float
    r_nodes: np.ndarray
    w_nodes: np.ndarray
    alpha: np.ndarray  # (Nr, Nw, NF)
    beta: np.ndarray   # (Nr, Nw, NF)


def transport_coefficients(metric, grid: PhaseSpaceGrid) -> TransportCoefficients:
    """Fill the advection-speed and momentum-force tables from a metric state."""
    t = metric.t
    w = grid.w_nodes_at(t)
    V = v_factor(t, w[:, None], grid.F_nodes[None, :])            # (Nw, NF)
    eml = np.exp(metric.mu - metric.lam)                          # (Nr,)
    alpha = eml[:, None, None] * (w[:, None] / V)[None, :, :]
    beta = (
        metric.lam_dot[:, None, None] * w[None, :, None]
        + (eml * metric.mu_prime)[:, None, None] * V[None, :, :]
    )
    return TransportCoefficients(t=t, r_nodes=grid.r_nodes, w_nodes=w,
                                 alpha=alpha, beta=beta)


def _sample_rw(table, r_q, w_q, dr, w_lo, dw, *, zero_outside):
    """Bilinear sample of a (Nr, Nw, NF) table at query points (r_q, w_q).

    Queries are (Nr, Nw, NF) arrays, one per arrival node of the matching
    F-slice.  r wraps periodically; outside the w-range the result is 0
    (zero_outside=True, used for f) or clamped to the edge value
    (zero_outside=False, used for the smooth coefficient tables).
    """
    Nr, Nw, _ = table.shape
    fr = r_q / dr
    ir = np.floor(fr).astype(np.int64)
    ar = fr - ir
    ir %= Nr
    ir1 = (ir + 1) % Nr

    fw = (w_q - w_lo) / dw
    if zero_outside:
        valid = (fw >= 0.0) & (fw <= Nw - 1)
    iw = np.clip(np.floor(fw).astype(np.int64), 0, Nw - 2)
    aw = fw - iw
    if not zero_outside:
        aw = np.clip(aw, 0.0, 1.0)

    kk = np.arange(table.shape[2])[None, None, :]
    v00 = table[ir, iw, kk]
    v10 = table[ir1, iw, kk]
    v01 = table[ir, iw + 1, kk]
    v11 = table[ir1, iw + 1, kk]
    out = (1 - ar) * (1 - aw) * v00 + ar * (1 - aw) * v10 \
        + (1 - ar) * aw * v01 + ar * aw * v11
    if zero_outside:
        out = np.where(valid, out, 0.0)
    return out


def _lagrange4(a):
    """Cubic Lagrange weights at the four stencil offsets (-1, 0, 1, 2)."""
    return (
        -a * (a - 1.0) * (a - 2.0) / 6.0,
        (a - 1.0) * (a + 1.0) * (a - 2.0) / 2.0,
        -a * (a + 1.0) * (a - 2.0) / 2.0,
        a * (a * a - 1.0) / 6.0,
    )


def _sample_f(table, r_q, w_q, dr, w_lo, dw):
    """Quasi-monotone cubic sample of the distribution (zero outside in w).

    Cubic Lagrange in both r (periodic) and w, clipped into the min/max of
    the surrounding 2x2 cell; bilinear fallback where the w-stencil does
    not fit inside the grid.
    """
    Nr, Nw, _ = table.shape
    lin = _sample_rw(table, r_q, w_q, dr, w_lo, dw, zero_outside=True)

    fr = r_q / dr
    ir = np.floor(fr).astype(np.int64)
    ar = fr - ir
    ir %= Nr
    fw = (w_q - w_lo) / dw
    iw_raw = np.floor(fw).astype(np.int64)
    inside = (fw >= 0.0) & (fw <= Nw - 1)
    cubic_ok = inside & (iw_raw >= 1) & (iw_raw <= Nw - 3)
    iw = np.clip(iw_raw, 1, Nw - 3)
    aw = fw - iw

    wr = _lagrange4(ar)
    ww = _lagrange4(aw)
    kk = np.arange(table.shape[2])[None, None, :]
    cub = np.zeros_like(lin)
    for mi, moff in enumerate((-1, 0, 1, 2)):
        rr = (ir + moff) % Nr
        acc = np.zeros_like(lin)
        for ni, noff in enumerate((-1, 0, 1, 2)):
            acc += ww[ni] * table[rr, iw + noff, kk]
        cub += wr[mi] * acc

    # clip into the bilinear cell's value range (positivity, max principle)
    ir1 = (ir + 1) % Nr
    v00 = table[ir, iw_raw.clip(0, Nw - 1), kk]
    v10 = table[ir1, iw_raw.clip(0, Nw - 1), kk]
    v01 = table[ir, (iw_raw + 1).clip(0, Nw - 1), kk]
    v11 = table[ir1, (iw_raw + 1).clip(0, Nw - 1), kk]
    lo = np.minimum(np.minimum(v00, v10), np.minimum(v01, v11))
    hi = np.maximum(np.maximum(v00, v10), np.maximum(v01, v11))
    cub = np.clip(cub, lo, hi)

    return np.where(cubic_ok, cub, lin)


def _coeff_at(coeffs: TransportCoefficients, r_q, w_q):
    dr = coeffs.r_nodes[1] - coeffs.r_nodes[0]
    dw = coeffs.w_nodes[1] - coeffs.w_nodes[0]
    a = _sample_rw(coeffs.alpha, r_q, w_q, dr, coeffs.w_nodes[0], dw, zero_outside=False)
    b = _sample_rw(coeffs.beta, r_q, w_q, dr, coeffs.w_nodes[0], dw, zero_outside=False)
    return a, b


def trace_back(coeffs_from: TransportCoefficients, coeffs_to: TransportCoefficients):
    """Departure points for every arrival node of the later level.

    RK2 midpoint, backward from coeffs_to.t to coeffs_from.t, with the
    coefficient field interpolated linearly in time between the two levels
    and bilinearly in (r, w).  Returns (r_dep, w_dep) arrays shaped like
    the coefficient tables; F is untouched by construction.
    """
    dt = coeffs_to.t - coeffs_from.t
    Nr, Nw, NF = coeffs_to.alpha.shape
    r_arr = np.broadcast_to(coeffs_to.r_nodes[:, None, None], (Nr, Nw, NF))
    w_arr = np.broadcast_to(coeffs_to.w_nodes[None, :, None], (Nr, Nw, NF))
    if dt == 0.0:
        return r_arr.copy(), w_arr.copy()

    # stage 1: rates at the arrival nodes (exact table values of the later level)
    a1 = coeffs_to.alpha
    b1 = coeffs_to.beta
    r_mid = r_arr - 0.5 * dt * a1
    w_mid = w_arr + 0.5 * dt * b1

    # stage 2: time-interpolated field at the midpoint
    a0m, b0m = _coeff_at(coeffs_from, r_mid, w_mid)
    a1m, b1m = _coeff_at(coeffs_to, r_mid, w_mid)
    a_mid = 0.5 * (a0m + a1m)
    b_mid = 0.5 * (b0m + b1m)

    r_dep = r_arr - dt * a_mid
    w_dep = w_arr + dt * b_mid
    return r_dep, w_dep


def advect(f: DistributionFn, coeffs_from: TransportCoefficients,
           coeffs_to: TransportCoefficients) -> DistributionFn:
    """Transport f from coeffs_from.t to coeffs_to.t (semi-Lagrangian update)."""
    if f.t != coeffs_from.t:
        raise ValueError("distribution and source coefficients disagree on t")
    grid = f.grid
    r_dep, w_dep = trace_back(coeffs_from, coeffs_to)
    # stored momentum coordinate of the departure point at the earlier time
    u_dep = w_dep * (coeffs_from.t / grid.t0)
    new_vals = _sample_f(f.values, r_dep, u_dep, grid.dr, grid.w_nodes[0], grid.dw0)
    return DistributionFn(grid, coeffs_to.t, new_vals)
