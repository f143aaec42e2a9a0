"""Run-time measurements of everything the late-time theory predicts.

Each record row collects sup-norms of the matter moments, deviations of the
metric rates from the expanding-background values, finite-difference
derivative monitors, the scaled support radius, the phase-space energies,
the two constraint residuals, the distances of the induced geometry to its
de Sitter limit, and the increment of the rescaled distribution.  Decay
exponents are extracted afterwards by least squares in log-log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields as dc_fields

import numpy as np

from .fd import d_periodic, d2_periodic, d_bounded, ddt_three_point
from .phasespace import (DistributionFn, MomentFields, PhaseSpaceGrid,
                         compute_moments, rescale_fhat, support_radius_w)

__all__ = [
    "DiagnosticsRecord",
    "RateFit",
    "fit_decay_rate",
    "energy_functionals",
    "nohair_distances",
    "constraint_residuals",
    "estimate_lam_inf",
    "make_record",
    "write_timeseries_csv",
    "read_timeseries_csv",
    "CSV_COLUMNS",
]


@dataclass
class DiagnosticsRecord:
    t: float
    sup_rho: float
    sup_p: float
    sup_j: float
    sup_q: float
    lamdot_dev: float      # sup |lambda_dot t - 1|
    mudot_dev: float       # sup |mu_dot t + 1|
    emu_dev: float         # sup |e^mu t sqrt(Lambda/3) - 1|
    sup_muprime: float
    sup_rhoprime: float
    sup_lamprime: float
    sup_mu2prime: float
    support_tw: float      # support radius in w, scaled by t
    E0: float
    tE0: float
    E1: float
    tE1: float
    eq4_residual: float
    eq5_residual: float
    nohair_g: float
    nohair_k: float
    fhat_delta: float


CSV_COLUMNS = [f.name for f in dc_fields(DiagnosticsRecord)]


@dataclass
class RateFit:
    """Least-squares power-law fit ln v = intercept + exponent ln t."""

    exponent: float
    intercept: float
    residual: float   # RMS of the log-log fit residuals
    t_lo: float
    t_hi: float
    n: int


def fit_decay_rate(t, values, window=None, min_samples=2) -> RateFit:
    """Fit a power law through (t, values) inside the window.

    Rejects non-positive values inside the window: the series has hit the
    rounding floor (or a constructed zero) and its logarithm is undefined.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    if window is None:
        window = (t.max() / 10.0, t.max())
    lo, hi = window
    if not lo < hi:
        raise ValueError(f"fit window must satisfy t_lo < t_hi (got [{lo}, {hi}])")
    mask = (t >= lo) & (t <= hi) & ~np.isnan(v)
    if mask.sum() < min_samples:
        raise ValueError(f"only {int(mask.sum())} usable samples in window [{lo}, {hi}]")
    tv, vv = t[mask], v[mask]
    if np.any(vv <= 0.0):
        raise ValueError("non-positive values in fit window (series at rounding floor)")
    x, y = np.log(tv), np.log(vv)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return RateFit(
        exponent=float(slope),
        intercept=float(intercept),
        residual=float(np.sqrt(np.mean(resid**2))),
        t_lo=float(lo),
        t_hi=float(hi),
        n=int(mask.sum()),
    )


def energy_functionals(f: DistributionFn, grid: PhaseSpaceGrid, l: int = 1):
    """Phase-space L2 energies (E_0, E_l) over dr dw dF.

    E_0 integrates f^2; the l = 1 energy adds the squared first derivatives
    with the momentum derivative weighted by t^-2.
    """
    if l not in (0, 1):
        raise ValueError(f"energy order l must be 0 or 1 (got {l})")
    t = f.t
    cell = grid.dr * grid.dw_at(t) * grid.dF
    e0 = float(np.sum(f.values**2)) * cell
    if l == 0:
        return e0, e0
    f10 = d_periodic(f.values, grid.dr, axis=0)
    f01 = d_bounded(f.values, grid.dw_at(t), axis=1)
    e1 = e0 + (float(np.sum(f10**2)) + float(np.sum(f01**2)) / t**2) * cell
    return e0, e1


def estimate_lam_inf(lam: np.ndarray, t: float) -> np.ndarray:
    """Limit profile of lambda - ln t, proxied by its value at the final time."""
    return lam - math.log(t)


def nohair_distances(t, lam, lam_dot, mu, lam_inf, Lambda):
    """Sup-norm distances of the induced geometry to the de Sitter limit.

    nohair_g compares t^-2 g_rr with its limit e^(2 lam_inf); the angular
    block is exactly t^2 g_K by the areal gauge and contributes nothing.
    nohair_k compares t^-2 k_ij against H g_inf,ij with H = sqrt(Lambda/3),
    taking the worse of the rr component and the (r-independent) angular
    coefficient.
    """
    H = math.sqrt(Lambda / 3.0)
    with np.errstate(over="ignore", invalid="ignore"):
        e2li = np.exp(2.0 * lam_inf)
        g_dist = float(np.max(np.abs(np.exp(2.0 * lam) / t**2 - e2li)))
        k_rr = np.exp(-mu) * lam_dot * np.exp(2.0 * lam)
        k_rr_dist = float(np.max(np.abs(k_rr / t**2 - H * e2li)))
        k_ang_dist = float(np.max(np.abs(np.exp(-mu) / t - H)))
    return g_dist, max(k_rr_dist, k_ang_dist)


def constraint_residuals(metric, moments: MomentFields, grid: PhaseSpaceGrid,
                         Lambda, lamdot_levels=None):
    """Residuals of the momentum constraint and of the untracked field equation.

    eq4: sup_r |FD(mu)' + 4 pi t e^(lambda+mu) j|.
    eq5: sup_r of the full second-order combination minus 4 pi q, with mu'',
    mu', lambda' by centered differences in r and lambda_ddot from the
    quadratic through the three newest stored lambda_dot levels.  Returns
    nan for eq5 while fewer than three levels exist (absent, not zero).
    """
    t = metric.t
    dr = grid.dr
    mu_p_fd = d_periodic(metric.mu, dr)
    eq4 = float(np.max(np.abs(mu_p_fd + 4.0 * np.pi * t * np.exp(metric.lam + metric.mu) * moments.j)))

    eq5 = math.nan
    if lamdot_levels is not None and len(lamdot_levels) >= 3:
        (ta, va), (tb, vb), (tc, vc) = lamdot_levels[-3], lamdot_levels[-2], lamdot_levels[-1]
        lam_ddot = ddt_three_point((ta, tb, tc), (va, vb, vc))
        lam_p = d_periodic(metric.lam, dr)
        mu_pp = d2_periodic(metric.mu, dr)
        lhs = (
            np.exp(-2.0 * metric.lam) * (mu_pp + mu_p_fd * (mu_p_fd - lam_p))
            - np.exp(-2.0 * metric.mu)
            * (lam_ddot + (metric.lam_dot - metric.mu_dot) * (metric.lam_dot + 1.0 / t))
            + Lambda
        )
        eq5 = float(np.max(np.abs(lhs - 4.0 * np.pi * moments.q)))
    return eq4, eq5


def make_record(metric, f: DistributionFn, moments: MomentFields,
                grid: PhaseSpaceGrid, Lambda, *, prev_fhat=None,
                lamdot_levels=None, lam_inf=None) -> DiagnosticsRecord:
    """Fill one diagnostics row; context-dependent fields become nan if their
    inputs are absent (insufficient history, limit profile not yet known)."""
    t = metric.t
    H = math.sqrt(Lambda / 3.0)
    e0, e1 = energy_functionals(f, grid, l=1)
    eq4, eq5 = constraint_residuals(metric, moments, grid, Lambda, lamdot_levels)

    if lam_inf is not None:
        nh_g, nh_k = nohair_distances(t, metric.lam, metric.lam_dot, metric.mu,
                                      lam_inf, Lambda)
    else:
        nh_g = nh_k = math.nan

    if prev_fhat is not None:
        fh_delta = float(np.max(np.abs(rescale_fhat(f) - prev_fhat)))
    else:
        fh_delta = math.nan

    return DiagnosticsRecord(
        t=t,
        sup_rho=float(np.max(moments.rho)),
        sup_p=float(np.max(moments.p)),
        sup_j=float(np.max(np.abs(moments.j))),
        sup_q=float(np.max(moments.q)),
        lamdot_dev=float(np.max(np.abs(metric.lam_dot * t - 1.0))),
        mudot_dev=float(np.max(np.abs(metric.mu_dot * t + 1.0))),
        emu_dev=float(np.max(np.abs(np.exp(metric.mu) * t * H - 1.0))),
        sup_muprime=float(np.max(np.abs(metric.mu_prime))),
        sup_rhoprime=float(np.max(np.abs(d_periodic(moments.rho, grid.dr)))),
        sup_lamprime=float(np.max(np.abs(d_periodic(metric.lam, grid.dr)))),
        sup_mu2prime=float(np.max(np.abs(d2_periodic(metric.mu, grid.dr)))),
        support_tw=support_radius_w(f) * t,
        E0=e0,
        tE0=t * e0,
        E1=e1,
        tE1=t * e1,
        eq4_residual=eq4,
        eq5_residual=eq5,
        nohair_g=nh_g,
        nohair_k=nh_k,
        fhat_delta=fh_delta,
    )


def write_timeseries_csv(records, path: str) -> str:
    """One header row, one record per line, fixed column order; absent
    values (nan) are written as empty fields."""
    with open(path, "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for rec in records:
            vals = []
            for col in CSV_COLUMNS:
                v = float(getattr(rec, col))
                vals.append("" if math.isnan(v) else repr(v))
            fh.write(",".join(vals) + "\n")
    return path


def read_timeseries_csv(path: str) -> dict[str, np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    out = {}
    for k, name in enumerate(header):
        out[name] = np.array([float(row[k]) if row[k] != "" else math.nan for row in rows])
    return out
