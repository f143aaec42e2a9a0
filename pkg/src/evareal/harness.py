"""Run orchestration: evolution driver, rate extraction, comparison and
refinement studies, and the artifact layout of a run directory.

A run directory contains:

    manifest.json            config echo, wall times, termination, file list
    timeseries.csv           one diagnostics record per output step
    metric_history.npz       metric fields + q at output cadence
    snapshots/f_NNNNN.{bin,txt}   periodic distribution snapshots
    snapshots/moments_NNNNN.csv   moments per r-node at the same times
    rates.csv                fitted decay exponents (written by the rates command)
    trajectories/            characteristic CSVs + summary (characteristics command)

All recorded values are deterministic functions of the configuration; no
wall-clock or unordered reduction enters any CSV.
"""

from __future__ import annotations

import glob
import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .characteristics import (MetricHistory, integrate_characteristic,
                              write_trajectory_csv)
from .diagnostics import (estimate_lam_inf, fit_decay_rate, make_record,
                          nohair_distances, read_timeseries_csv,
                          write_timeseries_csv)
from .fd import d_periodic
from .kinematics import ConfigError, SimConfig, require_valid
from .metric import (BlowUpError, attractor_e2mu, cfl_time_step, initial_state,
                     step, vacuum_solution_exact)
from .phasespace import (build_initial_data, compute_moments,
                         export_moments_csv, grid_from_config, load_snapshot,
                         rescale_fhat, save_snapshot, support_radius_w,
                         weighted_sobolev_distance)

__all__ = [
    "RunManifest",
    "RunResult",
    "evolve_run",
    "EXPECTED_EXPONENTS",
    "rates_report",
    "write_rates_csv",
    "pick_seeds",
    "characteristics_report",
    "initial_data_distances",
    "compare_runs",
    "convergence_study",
]


@dataclass
class RunManifest:
    config: dict
    started: str
    finished: str
    termination: str   # completed | blow-up | error
    t_last: float
    version: str
    files: list[str] = field(default_factory=list)

    def write(self, path: str) -> str:
        rel = os.path.relpath(path, os.path.dirname(path))
        if rel not in self.files:
            self.files.append(rel)
        with open(path, "w") as fh:
            json.dump(self.__dict__, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


@dataclass
class RunResult:
    cfg: SimConfig
    out_dir: str
    termination: str
    records: list
    history: MetricHistory
    final_metric: object
    final_f: object
    manifest: RunManifest


def _now() -> str:
    import datetime

    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def evolve_run(cfg: SimConfig, out_dir: str, *, quiet: bool = True) -> RunResult:
    """Evolve the coupled system from t0 to t_end, emitting the run artifacts.

    The manifest is written even when the run aborts with a blow-up; the
    no-hair columns are recomputed over the whole history once the limit
    profile of lambda is known from the final state.
    """
    require_valid(cfg)
    os.makedirs(out_dir, exist_ok=True)
    snap_dir = os.path.join(out_dir, "snapshots")
    os.makedirs(snap_dir, exist_ok=True)

    grid = grid_from_config(cfg)
    f = build_initial_data(cfg, grid)
    metric = initial_state(cfg, grid, f)
    hist = MetricHistory(Lambda=cfg.Lambda, r_nodes=grid.r_nodes)

    records: list = []
    lamdot_levels: list = []
    prev_fhat = None
    files: list[str] = []
    started = _now()
    termination = "completed"
    t_end_gate = cfg.t_end * (1.0 - 1e-12)

    def do_record(metric, f):
        nonlocal prev_fhat
        m = compute_moments(f)
        lamdot_levels.append((metric.t, np.array(metric.lam_dot)))
        rec = make_record(metric, f, m, grid, cfg.Lambda, prev_fhat=prev_fhat,
                          lamdot_levels=lamdot_levels, lam_inf=None)
        prev_fhat = rescale_fhat(f)
        records.append(rec)
        hist.append(metric, m.q)
        idx = len(records) - 1
        if idx % cfg.snapshot_every == 0 or metric.t >= t_end_gate:
            prefix = os.path.join(snap_dir, f"f_{idx:05d}")
            for p in save_snapshot(f, prefix):
                files.append(os.path.relpath(p, out_dir))
            mpath = os.path.join(snap_dir, f"moments_{idx:05d}.csv")
            export_moments_csv(m, grid, mpath)
            files.append(os.path.relpath(mpath, out_dir))

    do_record(metric, f)
    nstep = 0
    try:
        while metric.t < t_end_gate:
            dt = min(cfl_time_step(metric, grid, cfg), cfg.t_end - metric.t)
            metric, f = step(metric, f, dt, cfg)
            nstep += 1
            if nstep % cfg.output_every == 0 or metric.t >= t_end_gate:
                do_record(metric, f)
            if not quiet and nstep % 200 == 0:
                print(f"  t = {metric.t:9.4f}  steps = {nstep}")
    except BlowUpError as err:
        termination = "blow-up"
        if not quiet:
            print(f"  blow-up detected; last good time t = {err.t_last}")

    # limit profile of lambda from the final stored level, then the no-hair
    # series over the whole history
    lam_inf = estimate_lam_inf(hist.lam[-1], hist.times[-1])
    for k, rec in enumerate(records):
        rec.nohair_g, rec.nohair_k = nohair_distances(
            hist.times[k], hist.lam[k], hist.lam_dot[k], hist.mu[k],
            lam_inf, cfg.Lambda)
    # the estimator anchors the final distance to exactly zero; that row is
    # a construction artifact, not a measurement
    records[-1].nohair_g = math.nan

    ts_path = os.path.join(out_dir, "timeseries.csv")
    write_timeseries_csv(records, ts_path)
    files.append("timeseries.csv")
    hist_path = os.path.join(out_dir, "metric_history.npz")
    hist.save(hist_path)
    files.append("metric_history.npz")

    manifest = RunManifest(
        config=cfg.echo(),
        started=started,
        finished=_now(),
        termination=termination,
        t_last=float(records[-1].t),
        version=__version__,
        files=sorted(files),
    )
    manifest.write(os.path.join(out_dir, "manifest.json"))
    return RunResult(cfg=cfg, out_dir=out_dir, termination=termination,
                     records=records, history=hist, final_metric=metric,
                     final_f=f, manifest=manifest)


# ---------------------------------------------------------------------------
# decay-rate extraction

# column -> (reference exponent, acceptance mode, tolerance/bound)
#   "band":  pass iff |exponent - target| <= tol
#   "upper": pass iff exponent <= bound
EXPECTED_EXPONENTS = {
    "sup_rho": (-3.0, "band", 0.3),
    "sup_j": (-4.0, "band", 0.4),
    "sup_p": (-5.0, "band", 0.5),
    "sup_q": (-5.0, "band", 0.5),
    "sup_muprime": (-3.0, "upper", -2.5),
    "nohair_g": (-3.0, "upper", -2.5),
    "fhat_delta": (-2.0, "upper", -1.5),
}


def rates_report(timeseries_path: str, window=None, min_samples: int = 8):
    """Fit every monitored column; returns (fits, skipped, summary rows)."""
    data = read_timeseries_csv(timeseries_path)
    t = data["t"]
    if window is None:
        window = (t.max() / 10.0, t.max())
    in_window = (t >= window[0]) & (t <= window[1])
    if in_window.sum() < min_samples:
        raise ValueError(
            f"need at least {min_samples} rows in window [{window[0]}, {window[1]}], "
            f"got {int(in_window.sum())}"
        )
    fits, skipped, summary = {}, {}, []
    for name, (target, mode, tol) in EXPECTED_EXPONENTS.items():
        try:
            fit = fit_decay_rate(t, data[name], window, min_samples=min_samples)
        except ValueError as err:
            skipped[name] = str(err)
            summary.append({"name": name, "status": "skip", "reason": str(err)})
            continue
        fits[name] = fit
        if mode == "band":
            ok = abs(fit.exponent - target) <= tol
            expect = f"{target} +- {tol}"
        else:
            ok = fit.exponent <= tol
            expect = f"<= {tol} (target {target})"
        summary.append({
            "name": name,
            "status": "pass" if ok else "fail",
            "exponent": fit.exponent,
            "expected": expect,
        })
    return fits, skipped, summary


def write_rates_csv(fits: dict, path: str) -> str:
    with open(path, "w") as fh:
        fh.write("name,exponent,intercept,residual,t_lo,t_hi\n")
        for name, fit in fits.items():
            fh.write(f"{name},{fit.exponent!r},{fit.intercept!r},{fit.residual!r},"
                     f"{fit.t_lo!r},{fit.t_hi!r}\n")
    return path


# ---------------------------------------------------------------------------
# characteristic integrations over a stored run

def _snapshot_prefixes(run_dir: str):
    out = []
    for txt in sorted(glob.glob(os.path.join(run_dir, "snapshots", "f_*.txt"))):
        prefix = txt[:-4]
        with open(txt) as fh:
            for line in fh:
                if line.startswith("t ="):
                    out.append((float(line.partition("=")[2]), prefix))
                    break
    return out


def pick_seeds(run_dir: str, n: int, seed_time: float):
    """Deterministic seed points from the stored snapshot closest below
    seed_time: strong-f nodes with decent |w|, alternating momentum sign."""
    snaps = _snapshot_prefixes(run_dir)
    if not snaps:
        raise FileNotFoundError(f"no snapshots under {run_dir}")
    eligible = [sp for sp in snaps if sp[0] <= seed_time * (1 + 1e-9)]
    t_snap, prefix = (eligible or snaps)[-1]
    f = load_snapshot(prefix)
    vals = f.values
    fmax = vals.max()
    if fmax <= 0.0:
        raise ValueError("stored distribution is identically zero; nothing to seed")
    w = f.grid.w_nodes_at(f.t)
    wsup = support_radius_w(f)
    mask = (vals >= 0.05 * fmax) & (np.abs(w)[None, :, None] >= 0.25 * wsup)
    idx = np.argwhere(mask)
    order = np.argsort(-vals[mask], kind="stable")
    idx = idx[order]
    pos = [tuple(i) for i in idx if w[i[1]] > 0]
    neg = [tuple(i) for i in idx if w[i[1]] < 0]
    seeds = []
    for pool, m in ((pos, (n + 1) // 2), (neg, n // 2)):
        if not pool:
            continue
        # stride down the value-ordered candidates for genuinely distinct orbits
        picks = sorted(set(np.linspace(0, len(pool) - 1, max(m, 1)).astype(int)))
        for k in picks[:m]:
            i, jw, kF = pool[k]
            seeds.append((f.t, float(f.grid.r_nodes[i]), float(w[jw]),
                          float(f.grid.F_nodes[kF])))
    return seeds


def characteristics_report(run_dir: str, seeds=12, s_end=None, seed_time=10.0,
                           out_dir=None, warn=print):
    """Integrate characteristics + variational flow over the stored history.

    seeds: an int (sample that many from the snapshot nearest seed_time) or
    an explicit list of (t, r, w, F) tuples.  Emits one CSV per trajectory
    plus a bound summary; returns (trajectories, summary rows).
    """
    hist = MetricHistory.load(os.path.join(run_dir, "metric_history.npz"))
    if isinstance(seeds, int):
        seed_list = pick_seeds(run_dir, seeds, seed_time)
    else:
        seed_list = list(seeds)
        snaps = _snapshot_prefixes(run_dir)
        for t_seed, r, w, F in seed_list:
            best = min(snaps, key=lambda sp: abs(sp[0] - t_seed)) if snaps else None
            if best is None:
                continue
            f = load_snapshot(best[1])
            wr = support_radius_w(f) * f.t / t_seed
            if abs(w) > wr > 0.0:
                warn(f"warning: seed (t={t_seed}, r={r}, w={w}, F={F}) lies outside "
                     f"the stored support (|w| <~ {wr:.4g}); integrating anyway")
    if s_end is None:
        s_end = hist.t_max

    out_dir = out_dir or os.path.join(run_dir, "trajectories")
    os.makedirs(out_dir, exist_ok=True)
    trajs, rows = [], []
    for k, seed in enumerate(seed_list):
        samples = [s for s in hist.times if seed[0] <= s <= s_end]
        if not samples or samples[0] > seed[0]:
            samples = [seed[0]] + samples
        if samples[-1] < s_end:
            samples = samples + [s_end]
        traj = integrate_characteristic(hist, seed, s_end, sample_times=samples)
        write_trajectory_csv(traj, os.path.join(out_dir, f"traj_{k:03d}.csv"))
        trajs.append(traj)
        rows.append({"trajectory": k, **traj.summary()})
    with open(os.path.join(out_dir, "summary.csv"), "w") as fh:
        cols = ["trajectory", "t_start", "r", "w", "F", "max_E_ratio",
                "max_dRdr", "max_sdWdr", "sup_s2_csum"]
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(repr(row[c]) if c != "trajectory" else str(row[c])
                              for c in cols) + "\n")
    return trajs, rows


# ---------------------------------------------------------------------------
# initial-data comparison (stability experiment)

def _h5_norm_1d(arr: np.ndarray, dr: float, max_order: int = 5) -> float:
    """Discrete H^k norm of a periodic 1D field via iterated central FD."""
    total = 0.0
    d = np.asarray(arr, dtype=float)
    for k in range(max_order + 1):
        total += float(np.sum(d * d)) * dr
        d = d_periodic(d, dr)
    return math.sqrt(total)


def initial_data_distances(cfg_a: SimConfig, cfg_b: SimConfig) -> dict:
    """Discrete norms separating two initial-data sets.

    The metric pieces reduce to 1D Sobolev norms up to order 5 in r of the
    induced metric / second fundamental form components (the angular metric
    block is identical by the areal gauge); the matter piece is the weighted
    phase-space Sobolev distance at (l, z) from the config.
    """
    require_valid(cfg_a)
    require_valid(cfg_b)
    same = all(getattr(cfg_a, k) == getattr(cfg_b, k)
               for k in ("Nr", "Nw", "NF", "w_max", "F_max", "K", "Lambda", "t0"))
    if not same:
        raise ConfigError(["configs must share grids, K, Lambda and t0 for comparison"])

    grid = grid_from_config(cfg_a)
    fa = build_initial_data(cfg_a, grid)
    fb = build_initial_data(cfg_b, grid)
    ma = initial_state(cfg_a, grid, fa)
    mb = initial_state(cfg_b, grid, fb)
    t0 = cfg_a.t0

    g_dist = _h5_norm_1d(np.exp(2.0 * ma.lam) - np.exp(2.0 * mb.lam), grid.dr)
    krr_a = np.exp(-ma.mu) * ma.lam_dot * np.exp(2.0 * ma.lam)
    krr_b = np.exp(-mb.mu) * mb.lam_dot * np.exp(2.0 * mb.lam)
    kang_a = np.exp(-ma.mu) * t0
    kang_b = np.exp(-mb.mu) * t0
    k_dist = math.sqrt(_h5_norm_1d(krr_a - krr_b, grid.dr) ** 2
                       + _h5_norm_1d(kang_a - kang_b, grid.dr) ** 2)
    f_dist = weighted_sobolev_distance(fa, fb, l=cfg_a.l_norm, z=cfg_a.z)
    return {"metric_g_H5": g_dist, "metric_k_H5": k_dist, "matter_H4z": f_dist}


def compare_runs(cfg_a: SimConfig, cfg_b: SimConfig, out_dir: str, window=None):
    """Initial-data distances plus the side-by-side attractor verdict."""
    distances = initial_data_distances(cfg_a, cfg_b)
    res_a = evolve_run(cfg_a, os.path.join(out_dir, "A"))
    res_b = evolve_run(cfg_b, os.path.join(out_dir, "B"))
    report = {
        "distances": distances,
        "terminations": {"A": res_a.termination, "B": res_b.termination},
        "rates": {},
    }
    for label, res in (("A", res_a), ("B", res_b)):
        fits, skipped, summary = rates_report(
            os.path.join(res.out_dir, "timeseries.csv"), window=window)
        write_rates_csv(fits, os.path.join(res.out_dir, "rates.csv"))
        report["rates"][label] = {
            name: {"exponent": fit.exponent} for name, fit in fits.items()
        }
    with open(os.path.join(out_dir, "comparison.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


# ---------------------------------------------------------------------------
# refinement study

def _scaled_config(cfg: SimConfig, level: int) -> SimConfig:
    """Halve (dr, dw, dt) per level.  The CFL-bound candidates scale with the
    grid automatically, so only the two explicit caps need halving."""
    s = 2**level
    return replace(cfg,
                   Nr=cfg.Nr * s,
                   Nw=(cfg.Nw - 1) * s + 1,
                   dt_cap=cfg.dt_cap / s,
                   dt_max=cfg.dt_max / s)


def _restrict(fine: np.ndarray) -> np.ndarray:
    """Restrict a level-(i+1) distribution to the level-i nodes."""
    return fine[::2, ::2, :]


def convergence_study(cfg: SimConfig, levels: int, out_dir: str):
    """Run the same physics with (dr, dw, dt) halved per level.

    Reports, per consecutive level pair, the observed orders of the vacuum
    metric error (against the closed-form solution, when f0 = 0), of the
    two constraint residuals at the final time, and of the self-convergence
    of f on common nodes.
    """
    if levels < 3:
        raise ConfigError([f"convergence study needs at least 3 levels (got {levels})"])
    require_valid(cfg)
    os.makedirs(out_dir, exist_ok=True)

    rows = []
    finals = []
    for i in range(levels):
        cfg_i = _scaled_config(cfg, i)
        res = evolve_run(cfg_i, os.path.join(out_dir, f"L{i}"))
        if res.termination != "completed":
            raise BlowUpError(res.records[-1].t)
        rec = res.records[-1]
        row = {"level": i, "Nr": cfg_i.Nr, "Nw": cfg_i.Nw,
               "eq4_residual": rec.eq4_residual, "eq5_residual": rec.eq5_residual}
        if cfg.f0 == 0.0:
            m = res.final_metric
            grid_i = grid_from_config(cfg_i)
            lam0 = cfg.lambda_amp * np.cos(2.0 * np.pi * grid_i.r_nodes)
            mu0 = 0.5 * math.log(attractor_e2mu(cfg.K, cfg.Lambda, cfg.t0)) + cfg.mu_offset
            lam_ex, e2mu_ex = vacuum_solution_exact(cfg.K, cfg.Lambda, rec.t,
                                                    cfg.t0, mu0, lam0)
            row["e2mu_err"] = float(np.max(np.abs(np.exp(2.0 * m.mu) / e2mu_ex - 1.0)))
            row["e2mu_attractor_dev"] = float(
                np.max(np.abs(np.exp(2.0 * m.mu) * (cfg.Lambda * rec.t**2 / 3.0 - cfg.K) - 1.0)))
            if lam_ex is not None:
                row["lam_err"] = float(np.max(np.abs(np.exp(m.lam - lam_ex) - 1.0)))
        finals.append(res.final_f.values)
        rows.append(row)

    for i in range(levels - 1):
        rows[i]["f_selfconv_err"] = float(
            np.max(np.abs(finals[i] - _restrict(finals[i + 1]))))

    def orders(key):
        out = {}
        vals = [row.get(key) for row in rows]
        for i in range(levels - 1):
            a, b = vals[i], vals[i + 1]
            if a is None or b is None or not (a > 0 and b > 0):
                continue
            out[f"L{i}/L{i + 1}"] = math.log2(a / b)
        return out

    report = {
        "levels": rows,
        "orders": {key: orders(key)
                   for key in ("e2mu_err", "lam_err", "eq4_residual",
                               "eq5_residual", "f_selfconv_err")},
    }
    csv_path = os.path.join(out_dir, "convergence.csv")
    keys = ["level", "Nr", "Nw", "e2mu_err", "e2mu_attractor_dev", "lam_err",
            "eq4_residual", "eq5_residual", "f_selfconv_err"]
    with open(csv_path, "w") as fh:
        fh.write(",".join(keys) + "\n")
        for row in rows:
            fh.write(",".join("" if row.get(k) is None else repr(row[k]) if
                              isinstance(row.get(k), float) else str(row[k])
                              for k in keys) + "\n")
    with open(os.path.join(out_dir, "convergence.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report
