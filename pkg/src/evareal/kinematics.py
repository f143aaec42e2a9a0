"""Shared domain types and mass-shell kinematics.

Conventions used throughout the package: geometrized units (G = c = 1),
signature -+++, areal time t > 0, all metric fields periodic in r with
period 1.  Particle momenta are parametrized by the frame radial momentum
w and the conserved squared angular momentum F >= 0; the energy factor
V = sqrt(1 + w^2 + F/t^2) enters every moment integral and every
characteristic speed.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import IntEnum

import numpy as np

__all__ = [
    "Symmetry",
    "sin_k",
    "v_factor",
    "MassShellPoint",
    "SimConfig",
    "ConfigError",
    "validate_config",
    "require_valid",
]


class Symmetry(IntEnum):
    """Constant-curvature class of the 2D symmetry orbits."""

    HYPERBOLIC = -1
    PLANE = 0
    SPHERICAL = 1


def sin_k(k, theta):
    """Curvature-adjusted sine: sin(theta), 1, sinh(theta) for k = 1, 0, -1."""
    k = Symmetry(k)
    theta = np.asarray(theta, dtype=float)
    if k is Symmetry.SPHERICAL:
        out = np.sin(theta)
    elif k is Symmetry.HYPERBOLIC:
        out = np.sinh(theta)
    else:
        out = np.ones_like(theta)
    return out if out.ndim else float(out)


def v_factor(t, w, F):
    """Energy factor V = sqrt(1 + w^2 + F/t^2); always >= 1 on the mass shell.

    Rejects t <= 0 and F < 0, which lie outside the parametrization.
    Broadcasts over array arguments.
    """
    t_arr = np.asarray(t, dtype=float)
    F_arr = np.asarray(F, dtype=float)
    if np.any(t_arr <= 0.0):
        raise ValueError("areal time t must be positive")
    if np.any(F_arr < 0.0):
        raise ValueError("angular-momentum variable F must be non-negative")
    w_arr = np.asarray(w, dtype=float)
    out = np.sqrt(1.0 + w_arr**2 + F_arr / t_arr**2)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class MassShellPoint:
    """A single point (t, w, F) on the symmetric mass shell."""

    t: float
    w: float
    F: float

    def __post_init__(self):
        if self.t <= 0.0:
            raise ValueError("MassShellPoint requires t > 0")
        if self.F < 0.0:
            raise ValueError("MassShellPoint requires F >= 0")

    @property
    def v(self) -> float:
        return v_factor(self.t, self.w, self.F)


@dataclass
class SimConfig:
    """Full run configuration.

    Defaults describe the small-data plane-symmetric reference setup with
    Lambda = 3 so that the Hubble constant of the attractor is
    H = sqrt(Lambda/3) = 1.
    """

    # background / run controls
    K: int = 0
    Lambda: float = 3.0
    t0: float = 1.0
    t_end: float = 100.0
    cfl: float = 0.9
    dt_cap: float = 0.05       # relative cap: dt <= dt_cap * t
    dt_max: float = 0.5        # absolute cap (keeps late-time records dense)
    output_every: int = 4      # diagnostics cadence in steps
    snapshot_every: int = 12   # f-snapshot cadence in records

    # phase-space grid
    Nr: int = 64
    Nw: int = 128
    NF: int = 8
    w_max: float = 1.0
    F_max: float = 1.0

    # initial data
    f0: float = 0.005          # matter amplitude
    A: float = 0.3             # relative cos(2 pi r) perturbation of f
    w_sup: float = 0.4         # initial momentum support half-width
    F_sup: float = 1.0         # initial angular-momentum support
    lambda_amp: float = 0.0    # cos(2 pi r) perturbation of initial lambda
    mu_offset: float = 0.0     # additive offset of initial mu (decaying mode)

    # norms for the initial-data comparison
    z: float = 3.0
    l_norm: int = 4

    def echo(self) -> dict:
        return asdict(self)


class ConfigError(ValueError):
    """Raised for an invalid configuration; carries the full violation list."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.violations))


def validate_config(cfg: SimConfig) -> list[str]:
    """Return the complete list of invariant violations (empty if valid)."""
    errs = []
    if cfg.K not in (-1, 0, 1):
        errs.append(f"symmetry class K must be one of -1, 0, 1 (got {cfg.K})")
    if not cfg.Lambda > 0.0:
        errs.append(f"cosmological constant Lambda must be positive (got {cfg.Lambda})")
    if not cfg.t0 > 0.0:
        errs.append(f"initial areal time t0 must be positive (got {cfg.t0})")
    elif cfg.K == 1 and cfg.Lambda > 0.0 and cfg.t0 <= cfg.Lambda ** -0.5:
        errs.append(
            "spherical requires t0 > Lambda^(-1/2) ~= "
            f"{cfg.Lambda ** -0.5:.3f} (got t0 = {cfg.t0})"
        )
    if not cfg.t_end > cfg.t0:
        errs.append(f"t_end must exceed t0 (got t_end = {cfg.t_end}, t0 = {cfg.t0})")
    for name in ("Nr", "Nw", "NF"):
        n = getattr(cfg, name)
        if not (isinstance(n, int) and n >= 4):
            errs.append(f"grid too small: {name} = {n} < 4")
    if not cfg.w_max > 0.0:
        errs.append(f"w_max must be positive (got {cfg.w_max})")
    if not cfg.F_max > 0.0:
        errs.append(f"F_max must be positive (got {cfg.F_max})")
    if not 0.0 < cfg.cfl <= 1.0:
        errs.append(f"cfl must lie in (0, 1] (got {cfg.cfl})")
    if not cfg.dt_cap > 0.0:
        errs.append(f"dt_cap must be positive (got {cfg.dt_cap})")
    if not cfg.dt_max > 0.0:
        errs.append(f"dt_max must be positive (got {cfg.dt_max})")
    if not (isinstance(cfg.output_every, int) and cfg.output_every >= 1):
        errs.append(f"output_every must be a positive integer (got {cfg.output_every})")
    if not (isinstance(cfg.snapshot_every, int) and cfg.snapshot_every >= 1):
        errs.append(f"snapshot_every must be a positive integer (got {cfg.snapshot_every})")
    if not cfg.f0 >= 0.0:
        errs.append(f"matter amplitude f0 must be non-negative (got {cfg.f0})")
    if not cfg.A > -1.0:
        errs.append(f"perturbation amplitude A must exceed -1 (got {cfg.A})")
    if cfg.w_max > 0.0 and not 0.0 < cfg.w_sup < cfg.w_max:
        errs.append(f"w_sup must lie in (0, w_max) (got w_sup = {cfg.w_sup}, w_max = {cfg.w_max})")
    if cfg.F_max > 0.0 and not 0.0 < cfg.F_sup <= cfg.F_max:
        errs.append(f"F_sup must lie in (0, F_max] (got F_sup = {cfg.F_sup}, F_max = {cfg.F_max})")
    if not cfg.z > 2.5:
        errs.append(f"Sobolev weight z must exceed 5/2 (got {cfg.z})")
    if not (isinstance(cfg.l_norm, int) and 0 <= cfg.l_norm <= 4):
        errs.append(f"norm order l must lie in 0..4 (got {cfg.l_norm})")
    return errs


def require_valid(cfg: SimConfig) -> SimConfig:
    """Return cfg unchanged, raising ConfigError with all violations otherwise."""
    errs = validate_config(cfg)
    if errs:
        raise ConfigError(errs)
    return cfg
