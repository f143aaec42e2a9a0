"""Discrete phase-space representation of f(t, r, w, F) and its functionals.

The momentum support of the matter shrinks like 1/t (the scaled momentum
t*w settles to a constant along every particle path), so a momentum grid
that is literally fixed in w loses all resolution long before the late
times the decay diagnostics need.  The grid here therefore contracts
self-similarly: values are stored on a fixed grid in the scaled momentum
u = w * t / t0, which coincides with the configured uniform w-grid
[-w_max, w_max] at t = t0.  At any time t the physical momentum nodes are

    w_j(t) = w_nodes[j] * t0 / t,

still a uniform grid, so every operation contracted on "the w-grid at
time t" (quadrature, interpolation, finite differences) keeps its plain
meaning with spacing dw(t) = dw0 * t0 / t.  A welcome side effect: the
stored array *is* the rescaled distribution evaluated on a fixed
u = t*w grid, which the convergence diagnostics need anyway.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fd import d_bounded, d_periodic

__all__ = [
    "PhaseSpaceGrid",
    "DistributionFn",
    "MomentFields",
    "make_grid",
    "bump_profile",
    "build_initial_data",
    "compute_moments",
    "support_radius_w",
    "rescale_fhat",
    "weighted_sobolev_distance",
    "save_snapshot",
    "load_snapshot",
    "export_moments_csv",
]

SUPPORT_THRESHOLD = 1e-14  # relative: separates support from rounding debris


@dataclass
class PhaseSpaceGrid:
    """Uniform (r, w, F) grid; periodic in r, contracting in w, midpoint in F."""

    Nr: int
    Nw: int
    NF: int
    w_max: float
    F_max: float
    t0: float
    r_nodes: np.ndarray
    w_nodes: np.ndarray   # w at the reference time t0 (= stored momentum axis)
    F_nodes: np.ndarray
    dr: float
    dw0: float
    dF: float

    def w_nodes_at(self, t: float) -> np.ndarray:
        return self.w_nodes * (self.t0 / t)

    def dw_at(self, t: float) -> float:
        return self.dw0 * (self.t0 / t)

    @property
    def u_nodes(self) -> np.ndarray:
        """Fixed nodes of the scaled momentum u = t * w."""
        return self.t0 * self.w_nodes

    def same_layout(self, other: "PhaseSpaceGrid") -> bool:
        return (
            (self.Nr, self.Nw, self.NF) == (other.Nr, other.Nw, other.NF)
            and math.isclose(self.w_max, other.w_max)
            and math.isclose(self.F_max, other.F_max)
            and math.isclose(self.t0, other.t0)
        )


def make_grid(Nr, Nw, NF, w_max, F_max, t0) -> PhaseSpaceGrid:
    r_nodes = np.arange(Nr) / Nr
    w_nodes = np.linspace(-w_max, w_max, Nw)
    dF = F_max / NF
    F_nodes = (np.arange(NF) + 0.5) * dF
    return PhaseSpaceGrid(
        Nr=Nr, Nw=Nw, NF=NF, w_max=float(w_max), F_max=float(F_max), t0=float(t0),
        r_nodes=r_nodes, w_nodes=w_nodes, F_nodes=F_nodes,
        dr=1.0 / Nr, dw0=float(w_nodes[1] - w_nodes[0]), dF=float(dF),
    )


def grid_from_config(cfg) -> PhaseSpaceGrid:
    return make_grid(cfg.Nr, cfg.Nw, cfg.NF, cfg.w_max, cfg.F_max, cfg.t0)


@dataclass
class DistributionFn:
    """f sampled at the grid nodes at areal time t; shape (Nr, Nw, NF)."""

    grid: PhaseSpaceGrid
    t: float
    values: np.ndarray

    def copy(self) -> "DistributionFn":
        return DistributionFn(self.grid, self.t, self.values.copy())

    def max(self) -> float:
        return float(self.values.max(initial=0.0))


@dataclass
class MomentFields:
    """Energy density, radial pressure, momentum flux and tangential pressure."""

    t: float
    rho: np.ndarray
    p: np.ndarray
    j: np.ndarray
    q: np.ndarray


def bump_profile(x):
    """C^2 compactly supported even profile (1 - x^2)^3 on |x| < 1."""
    x = np.asarray(x, dtype=float)
    out = np.where(np.abs(x) < 1.0, (1.0 - x**2) ** 3, 0.0)
    return out if out.ndim else float(out)


def build_initial_data(cfg, grid: PhaseSpaceGrid | None = None) -> DistributionFn:
    """Construct the initial distribution at t0.

    f(r, w, F) = f0 * bump(w / w_sup) * bump(F / F_sup) * (1 + A cos(2 pi r)).
    Evenness in w makes the initial momentum flux vanish identically, so the
    momentum constraint is satisfied with a constant initial mu.
    """
    if cfg.A <= -1.0:
        raise ValueError(f"perturbation amplitude A must exceed -1 (got {cfg.A})")
    if cfg.f0 < 0.0:
        raise ValueError(f"matter amplitude f0 must be non-negative (got {cfg.f0})")
    if grid is None:
        grid = grid_from_config(cfg)
    prof_w = bump_profile(grid.w_nodes / cfg.w_sup)   # w-grid at t0 is the stored axis
    prof_F = bump_profile(grid.F_nodes / cfg.F_sup)
    prof_r = 1.0 + cfg.A * np.cos(2.0 * np.pi * grid.r_nodes)
    vals = cfg.f0 * prof_r[:, None, None] * prof_w[None, :, None] * prof_F[None, None, :]
    return DistributionFn(grid, cfg.t0, vals)


def _w_quad_weights(grid: PhaseSpaceGrid, t: float) -> np.ndarray:
    """Trapezoid weights on the w-grid at time t."""
    w = np.full(grid.Nw, grid.dw_at(t))
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def compute_moments(f: DistributionFn) -> MomentFields:
    """Moment quadrature: midpoint in F, trapezoid in w, per r-node.

    rho = (pi/t^2) int V f,     p = (pi/t^2) int (w^2/V) f,
    j   = (pi/t^2) int w f,     q = (pi/t^4) int (F/V) f.
    """
    if np.any(f.values < 0.0):
        raise ValueError("distribution function must be non-negative")
    grid, t = f.grid, f.t
    w = grid.w_nodes_at(t)
    from .kinematics import v_factor

    V = v_factor(t, w[:, None], grid.F_nodes[None, :])        # (Nw, NF)
    tw = _w_quad_weights(grid, t)                             # (Nw,)
    pref = np.pi / t**2 * grid.dF

    def quad(weight_wf):
        return pref * np.einsum("rwf,wf,w->r", f.values, weight_wf, tw)

    rho = quad(V)
    p = quad(w[:, None] ** 2 / V)
    j = quad(np.broadcast_to(w[:, None], V.shape).copy())
    q = quad(grid.F_nodes[None, :] / V) / t**2
    return MomentFields(t=t, rho=rho, p=p, j=j, q=q)


def support_radius_w(f: DistributionFn) -> float:
    """Largest |w| node carrying a value above the relative support threshold."""
    fmax = f.max()
    if fmax <= 0.0:
        return 0.0
    occupied = np.any(f.values > SUPPORT_THRESHOLD * fmax, axis=(0, 2))
    if not occupied.any():
        return 0.0
    w = f.grid.w_nodes_at(f.t)
    return float(np.abs(w[occupied]).max())


def rescale_fhat(f: DistributionFn, u_nodes: np.ndarray | None = None) -> np.ndarray:
    """Sample the rescaled distribution fhat(u) = f(w = u/t) on a fixed u-grid.

    With the default u-grid (the grid's own u = t*w nodes) the stored values
    already live there and the sampling is exact; a custom u-grid goes
    through linear interpolation in the stored momentum axis with zero
    extension outside.
    """
    grid = f.grid
    if u_nodes is None:
        return f.values.copy()
    # query position on the stored (t0-level) momentum axis: w = u/t maps to
    # u_stored = w * t / t0 = u / t0
    q = np.asarray(u_nodes, dtype=float) / grid.t0
    out = np.empty((grid.Nr, len(q), grid.NF))
    for k in range(grid.NF):
        for i in range(grid.Nr):
            out[i, :, k] = np.interp(q, grid.w_nodes, f.values[i, :, k], left=0.0, right=0.0)
    return out


def weighted_sobolev_distance(f1: DistributionFn, f2: DistributionFn, l: int, z: float) -> float:
    """Discrete weighted Sobolev distance between two distributions.

    Sums, over all mixed difference orders a + b1 + b2 <= l (a in r, b1 in w,
    b2 in F), the weighted L2 norms of the finite-difference derivatives of
    f1 - f2 with momentum weight (1 + w^2 + F)^(z + b1 + b2).  Central
    stencils, one-sided at the w/F boundary rows, periodic wrap in r.
    """
    if not (0 <= l <= 4):
        raise ValueError(f"norm order l must lie in 0..4 (got {l})")
    if not z > 2.5:
        raise ValueError(f"Sobolev weight z must exceed 5/2 (got {z})")
    if not f1.grid.same_layout(f2.grid):
        raise ValueError("distributions live on different grids")
    if f1.t != f2.t:
        raise ValueError("distributions compared at different times")
    grid, t = f1.grid, f1.t
    diff = f1.values - f2.values
    w = grid.w_nodes_at(t)
    base_weight = 1.0 + w[None, :, None] ** 2 + grid.F_nodes[None, None, :]
    cell = grid.dr * grid.dw_at(t) * grid.dF

    total = 0.0
    for a in range(l + 1):
        for b1 in range(l + 1 - a):
            for b2 in range(l + 1 - a - b1):
                d = diff
                for _ in range(a):
                    d = d_periodic(d, grid.dr, axis=0)
                for _ in range(b1):
                    d = d_bounded(d, grid.dw_at(t), axis=1)
                for _ in range(b2):
                    d = d_bounded(d, grid.dF, axis=2)
                total += float(np.sum(base_weight ** (z + b1 + b2) * d * d)) * cell
    return math.sqrt(total)


# ---------------------------------------------------------------------------
# snapshot persistence: flat binary + small text sidecar, moments as CSV

def save_snapshot(f: DistributionFn, prefix: str) -> list[str]:
    """Dump f as <prefix>.bin (row-major r, w, F) with a <prefix>.txt sidecar.

    The sidecar's w_max is the half-width of the momentum grid *at the
    snapshot time*, which makes the pair self-describing.
    """
    bin_path = prefix + ".bin"
    txt_path = prefix + ".txt"
    f.values.astype(np.float64).tofile(bin_path)
    grid = f.grid
    with open(txt_path, "w") as fh:
        fh.write(f"t = {float(f.t)!r}\n")
        fh.write(f"Nr = {grid.Nr}\n")
        fh.write(f"Nw = {grid.Nw}\n")
        fh.write(f"NF = {grid.NF}\n")
        fh.write(f"w_max = {float(grid.w_max * grid.t0 / f.t)!r}\n")
        fh.write(f"F_max = {float(grid.F_max)!r}\n")
    return [bin_path, txt_path]


def load_snapshot(prefix: str) -> DistributionFn:
    meta = {}
    with open(prefix + ".txt") as fh:
        for line in fh:
            key, _, val = line.partition("=")
            meta[key.strip()] = val.strip()
    t = float(meta["t"])
    Nr, Nw, NF = int(meta["Nr"]), int(meta["Nw"]), int(meta["NF"])
    grid = make_grid(Nr, Nw, NF, float(meta["w_max"]), float(meta["F_max"]), t0=t)
    vals = np.fromfile(prefix + ".bin", dtype=np.float64).reshape(Nr, Nw, NF)
    return DistributionFn(grid, t, vals)


def export_moments_csv(m: MomentFields, grid: PhaseSpaceGrid, path: str) -> str:
    with open(path, "w") as fh:
        fh.write("r,rho,p,j,q\n")
        for i in range(grid.Nr):
            fh.write(f"{float(grid.r_nodes[i])!r},{float(m.rho[i])!r},"
                     f"{float(m.p[i])!r},{float(m.j[i])!r},{float(m.q[i])!r}\n")
    return path
