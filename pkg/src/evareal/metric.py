"""Metric evolution in areal gauge.

The two first-order field equations are algebraic in the time derivatives,
so per r-node they are plain ODEs:

    lambda_dot = [ (8 pi t^2 rho - K + Lambda t^2) e^(2 mu) - 1 ] / (2 t)
    mu_dot     = [ (8 pi t^2 p   + K - Lambda t^2) e^(2 mu) + 1 ] / (2 t)

The radial derivative of mu is recovered algebraically from the momentum
constraint mu' = -4 pi t e^(lambda+mu) j and doubles as a residual monitor;
the remaining (second-order) field equation is never solved, only
monitored.  One coupled step is a Heun predictor-corrector: matter is
transported once with coefficients time-interpolated between the current
level and the Euler-predicted level, then the metric is corrected with the
fresh moments.  The transport scheme is second order, so Heun (rather than
a higher-order integrator) wastes no moment evaluations.

Both rates approach the expanding background (lambda_dot -> 1/t,
mu_dot -> -1/t), so the integrator advances the deviations lambda - ln t
and mu + ln t and adds the exact quadrature of the 1/t part.  This is
still plain Heun, but the truncation error of the background -- which
would otherwise accumulate into a spurious drift dominating the late-time
attractor distances -- drops out identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kinematics import SimConfig, v_factor
from .phasespace import (DistributionFn, PhaseSpaceGrid, compute_moments,
                         grid_from_config)
from .transport import advect, transport_coefficients

__all__ = [
    "MetricState",
    "BlowUpError",
    "lambda_dot",
    "mu_dot",
    "mu_prime",
    "vacuum_de_sitter",
    "attractor_e2mu",
    "initial_state",
    "cfl_time_step",
    "step",
]


class BlowUpError(RuntimeError):
    """A field became non-finite; t_last is the last good areal time."""

    def __init__(self, t_last: float):
        self.t_last = t_last
        super().__init__(f"non-finite field encountered; last good time t = {t_last}")


@dataclass
class MetricState:
    """lambda(r), mu(r) at areal time t with cached rates."""

    t: float
    lam: np.ndarray
    mu: np.ndarray
    lam_dot: np.ndarray
    mu_dot: np.ndarray
    mu_prime: np.ndarray


def lambda_dot(K, Lambda, t, mu, rho):
    return ((8.0 * np.pi * t**2 * rho - K + Lambda * t**2) * np.exp(2.0 * mu) - 1.0) / (2.0 * t)


def mu_dot(K, Lambda, t, mu, p):
    return ((8.0 * np.pi * t**2 * p + K - Lambda * t**2) * np.exp(2.0 * mu) + 1.0) / (2.0 * t)


def mu_prime(t, lam, mu, j):
    return -4.0 * np.pi * t * np.exp(lam + mu) * j


def vacuum_de_sitter(Lambda, t, lambda0=0.0):
    """Exact plane-symmetric vacuum solution with the decaying mode removed.

    Returns (lambda, e^(2 mu)) = (ln t + lambda0, 3/(Lambda t^2)); the
    regression target for vacuum runs.
    """
    t = np.asarray(t, dtype=float)
    lam = np.log(t) + lambda0
    e2mu = 3.0 / (Lambda * t**2)
    if lam.ndim:
        return lam, e2mu
    return float(lam), float(e2mu)


def attractor_e2mu(K, Lambda, t):
    """e^(2 mu) on the vacuum attractor e^(-2 mu) = Lambda t^2 / 3 - K."""
    denom = Lambda * t**2 / 3.0 - K
    if denom <= 0.0:
        raise ValueError(
            f"attractor undefined: Lambda t^2/3 - K = {denom} <= 0 at t = {t}"
        )
    return 1.0 / denom


def vacuum_solution_exact(K, Lambda, t, t0, mu0, lam0=0.0):
    """Closed-form vacuum solution including the decaying mode.

    e^(-2 mu)(t) = Lambda t^2/3 - K + c/t with c fixed by mu(t0) = mu0.
    For K = 0 lambda also has an elementary form,
    lambda = lam0 + ln(t/t0) + (1/2) ln[(1 + 3c/(Lambda t^3)) /
    (1 + 3c/(Lambda t0^3))]; for K != 0 the lambda part is returned as None.
    """
    c = t0 * (math.exp(-2.0 * mu0) - (Lambda * t0**2 / 3.0 - K))
    y = Lambda * np.asarray(t, dtype=float) ** 2 / 3.0 - K + c / np.asarray(t, dtype=float)
    e2mu = 1.0 / y
    lam = None
    if K == 0:
        chat = 3.0 * c / Lambda
        lam = (np.asarray(lam0, dtype=float) + np.log(np.asarray(t, dtype=float) / t0)
               + 0.5 * np.log((1.0 + chat / np.asarray(t, dtype=float) ** 3)
                              / (1.0 + chat / t0**3)))
    return lam, e2mu


def initial_state(cfg: SimConfig, grid: PhaseSpaceGrid, f: DistributionFn) -> MetricState:
    """Initial metric: lambda = lambda_amp cos(2 pi r), mu constant at the
    vacuum-attractor value plus an optional offset (which excites the
    decaying mode), rates cached from the initial moments.

    The initial matter is even in w, so j vanishes and the constant mu is
    exactly compatible with the momentum constraint.
    """
    lam = cfg.lambda_amp * np.cos(2.0 * np.pi * grid.r_nodes)
    mu = np.full(grid.Nr,
                 0.5 * math.log(attractor_e2mu(cfg.K, cfg.Lambda, cfg.t0)) + cfg.mu_offset)
    m = compute_moments(f)
    return MetricState(
        t=cfg.t0,
        lam=lam,
        mu=mu,
        lam_dot=lambda_dot(cfg.K, cfg.Lambda, cfg.t0, mu, m.rho),
        mu_dot=mu_dot(cfg.K, cfg.Lambda, cfg.t0, mu, m.p),
        mu_prime=mu_prime(cfg.t0, lam, mu, m.j),
    )


def cfl_time_step(metric: MetricState, grid: PhaseSpaceGrid, cfg: SimConfig) -> float:
    """dt = cfl * min(dr/max|alpha|, dw/max|beta|, dt_cap * t, dt_max).

    Uses the cheap conservative bounds |alpha| <= e^(mu-lambda) and
    |beta| <= max|lambda_dot| w_max + max(e^(mu-lambda)|mu'|) V_max instead
    of scanning the coefficient tables.
    """
    t = metric.t
    eml = np.exp(metric.mu - metric.lam)
    alpha_bound = float(eml.max())
    w_edge = grid.w_max * grid.t0 / t
    v_edge = v_factor(t, w_edge, grid.F_max)
    beta_bound = float(np.abs(metric.lam_dot).max()) * w_edge \
        + float((eml * np.abs(metric.mu_prime)).max()) * v_edge
    candidates = [cfg.dt_cap * t, cfg.dt_max]
    if alpha_bound > 0.0:
        candidates.append(grid.dr / alpha_bound)
    if beta_bound > 0.0:
        candidates.append(grid.dw_at(t) / beta_bound)
    return cfg.cfl * min(candidates)


def step(metric: MetricState, f: DistributionFn, dt: float, cfg: SimConfig):
    """One Heun step of the coupled system; returns the advanced pair."""
    if dt == 0.0:
        return MetricState(metric.t, metric.lam.copy(), metric.mu.copy(),
                           metric.lam_dot.copy(), metric.mu_dot.copy(),
                           metric.mu_prime.copy()), f.copy()
    K, Lam = cfg.K, cfg.Lambda
    grid = f.grid
    t = metric.t
    t1 = t + dt

    with np.errstate(all="ignore"):
        m0 = compute_moments(f)
        ld0 = lambda_dot(K, Lam, t, metric.mu, m0.rho)
        md0 = mu_dot(K, Lam, t, metric.mu, m0.p)
        mp0 = mu_prime(t, metric.lam, metric.mu, m0.j)
        state0 = MetricState(t, metric.lam, metric.mu, ld0, md0, mp0)

        # exact quadrature of the background rates +-1/t
        bg = math.log(t1 / t)

        # Euler predictor for the metric at t1; rates there use the frozen
        # moments (the matter coupling in the coefficients is O(matter),
        # so the induced error stays below the RK2 truncation)
        lam_p = metric.lam + bg + dt * (ld0 - 1.0 / t)
        mu_p = metric.mu - bg + dt * (md0 + 1.0 / t)
        ld_p = lambda_dot(K, Lam, t1, mu_p, m0.rho)
        md_p = mu_dot(K, Lam, t1, mu_p, m0.p)
        mp_p = mu_prime(t1, lam_p, mu_p, m0.j)
        state_p = MetricState(t1, lam_p, mu_p, ld_p, md_p, mp_p)

        if f.values.any():
            c0 = transport_coefficients(state0, grid)
            c1 = transport_coefficients(state_p, grid)
            f1 = advect(f, c0, c1)
        else:
            f1 = DistributionFn(grid, t1, f.values.copy())  # vacuum fast path

        m1 = compute_moments(f1)
        ld1 = lambda_dot(K, Lam, t1, mu_p, m1.rho)
        md1 = mu_dot(K, Lam, t1, mu_p, m1.p)
        lam1 = metric.lam + bg + 0.5 * dt * ((ld0 - 1.0 / t) + (ld1 - 1.0 / t1))
        mu1 = metric.mu - bg + 0.5 * dt * ((md0 + 1.0 / t) + (md1 + 1.0 / t1))

        new = MetricState(
            t=t1,
            lam=lam1,
            mu=mu1,
            lam_dot=lambda_dot(K, Lam, t1, mu1, m1.rho),
            mu_dot=mu_dot(K, Lam, t1, mu1, m1.p),
            mu_prime=mu_prime(t1, lam1, mu1, m1.j),
        )

    for arr in (new.lam, new.mu, new.lam_dot, new.mu_dot, new.mu_prime, f1.values):
        if not np.all(np.isfinite(arr)):
            raise BlowUpError(t_last=t)
    return new, f1
