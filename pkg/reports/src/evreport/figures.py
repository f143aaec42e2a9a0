"""Figure builders.  Each returns a dict describing what was drawn (used by
the report page and by the tests) or None when its inputs are missing."""

from __future__ import annotations

import glob
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reader import read_csv_columns

# reference decay exponents of the late-time theory; "band" entries pass
# within +- tol of the target, "upper" entries pass at or below the bound
REFERENCE_EXPONENTS = {
    "sup_rho": {"target": -3.0, "mode": "band", "tol": 0.3},
    "sup_j": {"target": -4.0, "mode": "band", "tol": 0.4},
    "sup_p": {"target": -5.0, "mode": "band", "tol": 0.5},
    "sup_q": {"target": -5.0, "mode": "band", "tol": 0.5},
    "sup_muprime": {"target": -3.0, "mode": "upper", "bound": -2.5},
    "nohair_g": {"target": -3.0, "mode": "upper", "bound": -2.5},
    "fhat_delta": {"target": -2.0, "mode": "upper", "bound": -1.5},
}

DECAY_COLUMNS = ["sup_rho", "sup_p", "sup_j", "sup_q", "sup_muprime"]
NOHAIR_COLUMNS = ["nohair_g", "nohair_k", "fhat_delta"]
CONSTRAINT_COLUMNS = ["eq4_residual", "eq5_residual"]
ENERGY_COLUMNS = ["tE0", "tE1"]


def _positive(t, v):
    m = np.isfinite(v) & (v > 0.0)
    return t[m], v[m]


def _overlay_fit(ax, fit_row, color):
    tt = np.geomspace(fit_row["t_lo"], fit_row["t_hi"], 32)
    ax.loglog(tt, np.exp(fit_row["intercept"]) * tt ** fit_row["exponent"],
              color=color, lw=2.2, alpha=0.45,
              label=f"{fit_row['name']} fit: t^{fit_row['exponent']:+.2f}")


def _overlay_reference(ax, name, t_anchor, v_anchor, color):
    ref = REFERENCE_EXPONENTS.get(name)
    if ref is None:
        return None
    tt = np.geomspace(t_anchor, t_anchor * 8.0, 16)
    ax.loglog(tt, v_anchor * (tt / t_anchor) ** ref["target"], "--", color=color,
              lw=1.0, label=f"{name} target t^{ref['target']:+.0f}")
    return ref["target"]


def decay_figure(timeseries, rates_rows, path):
    t = timeseries["t"]
    fits = {row["name"]: row for row in rates_rows or []}
    fig, ax = plt.subplots(figsize=(7, 5))
    drawn, refs = [], {}
    for k, name in enumerate(DECAY_COLUMNS):
        if name not in timeseries:
            continue
        tt, vv = _positive(t, timeseries[name])
        if len(tt) < 2:
            continue
        color = f"C{k}"
        ax.loglog(tt, vv, ".", ms=3.5, color=color, label=name)
        if name in fits:
            _overlay_fit(ax, fits[name], color)
        mid = len(tt) // 2
        refs[name] = _overlay_reference(ax, name, tt[mid], vv[mid], color)
        drawn.append(name)
    if not drawn:
        plt.close(fig)
        return None
    ax.set_xlabel("areal time t")
    ax.set_ylabel("sup norm")
    ax.set_title("matter and metric decay")
    ax.legend(fontsize=7, ncol=2)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return {"columns": drawn, "reference_slopes": refs, "path": path}


def nohair_figure(timeseries, rates_rows, path):
    t = timeseries["t"]
    fits = {row["name"]: row for row in rates_rows or []}
    fig, ax = plt.subplots(figsize=(7, 5))
    drawn, refs = [], {}
    for k, name in enumerate(NOHAIR_COLUMNS):
        if name not in timeseries:
            continue
        tt, vv = _positive(t, timeseries[name])
        if len(tt) < 2:
            continue
        color = f"C{k}"
        ax.loglog(tt, vv, ".", ms=3.5, color=color, label=name)
        if name in fits:
            _overlay_fit(ax, fits[name], color)
        mid = len(tt) // 2
        refs[name] = _overlay_reference(ax, name, tt[mid], vv[mid], color)
        drawn.append(name)
    if not drawn:
        plt.close(fig)
        return None
    ax.set_xlabel("areal time t")
    ax.set_ylabel("distance to the de Sitter limit")
    ax.set_title("attractor convergence")
    ax.legend(fontsize=7)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return {"columns": drawn, "reference_slopes": refs, "path": path}


def constraints_figure(timeseries, path):
    t = timeseries["t"]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    drawn = []
    for k, name in enumerate(CONSTRAINT_COLUMNS):
        if name not in timeseries:
            continue
        tt, vv = _positive(t, timeseries[name])
        if len(tt) < 2:
            continue
        ax.loglog(tt, vv, ".-", ms=3.0, lw=0.8, color=f"C{k}", label=name)
        drawn.append(name)
    if not drawn:
        plt.close(fig)
        return None
    ax.set_xlabel("areal time t")
    ax.set_ylabel("residual")
    ax.set_title("constraint monitors")
    ax.legend(fontsize=8)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return {"columns": drawn, "path": path}


def energies_figure(timeseries, path):
    t = timeseries["t"]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    drawn = []
    for k, name in enumerate(ENERGY_COLUMNS):
        if name not in timeseries:
            continue
        m = np.isfinite(timeseries[name])
        if m.sum() < 2:
            continue
        ax.semilogx(t[m], timeseries[name][m], ".-", ms=3.0, lw=0.8,
                    color=f"C{k}", label=name)
        drawn.append(name)
    if not drawn:
        plt.close(fig)
        return None
    ax.set_xlabel("areal time t")
    ax.set_ylabel("t-weighted phase-space energy")
    ax.set_title("energy boundedness")
    ax.legend(fontsize=8)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return {"columns": drawn, "path": path}


def characteristics_figure(run_dir, path):
    traj_paths = sorted(glob.glob(os.path.join(run_dir, "trajectories", "traj_*.csv")))
    if not traj_paths:
        return None
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4.2))
    for tp in traj_paths:
        cols = read_csv_columns(tp)
        ax1.semilogx(cols["s"], np.abs(cols["dRdr"]), lw=0.8)
        ax2.semilogx(cols["s"], np.abs(cols["sdWdr"]), lw=0.8)
    ax1.set_xlabel("s")
    ax1.set_ylabel("|dR/dr|")
    ax2.set_xlabel("s")
    ax2.set_ylabel("s |dW/dr|")
    fig.suptitle("characteristic derivative bounds")
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return {"n_trajectories": len(traj_paths), "path": path}
