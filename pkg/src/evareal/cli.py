"""Command-line front end.

Exit codes: 0 success, 2 invalid configuration or usage, 3 blow-up during
evolution, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .configfile import parse_config
from .harness import (characteristics_report, compare_runs, convergence_study,
                      evolve_run, rates_report, write_rates_csv)
from .kinematics import ConfigError
from .metric import BlowUpError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_IO = 4


def _parse_seeds(spec: str):
    """Either an integer count or 't,r,w,F;t,r,w,F;...'."""
    spec = spec.strip()
    if ";" not in spec and "," not in spec:
        return int(spec)
    seeds = []
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        nums = [float(x) for x in part.split(",")]
        if len(nums) != 4:
            raise ValueError(f"seed {part!r} must be 't,r,w,F'")
        seeds.append(tuple(nums))
    return seeds


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="evareal",
        description="surface-symmetric Einstein-Vlasov evolution and verification",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("evolve", help="run the coupled evolution")
    pe.add_argument("--config", required=True)
    pe.add_argument("--out", required=True)
    pe.add_argument("--verbose", action="store_true")

    pr = sub.add_parser("rates", help="fit decay exponents from a timeseries")
    pr.add_argument("--timeseries", required=True)
    pr.add_argument("--out", default=None, help="rates.csv path (default: next to the timeseries)")
    pr.add_argument("--window", nargs=2, type=float, default=None, metavar=("T_LO", "T_HI"))

    pc = sub.add_parser("characteristics", help="integrate characteristics over a stored run")
    pc.add_argument("--run", required=True)
    pc.add_argument("--out", default=None, help="output directory (default: <run>/trajectories)")
    pc.add_argument("--seeds", default="12", help="count, or explicit 't,r,w,F;...' list")
    pc.add_argument("--seed-time", type=float, default=10.0)
    pc.add_argument("--s-end", type=float, default=None)

    pp = sub.add_parser("compare", help="initial-data distances + side-by-side evolutions")
    pp.add_argument("--config-a", required=True)
    pp.add_argument("--config-b", required=True)
    pp.add_argument("--out", required=True)
    pp.add_argument("--window", nargs=2, type=float, default=None)

    pv = sub.add_parser("convergence", help="refinement study")
    pv.add_argument("--config", required=True)
    pv.add_argument("--levels", type=int, default=3)
    pv.add_argument("--out", required=True)
    return p


def cmd_evolve(args) -> int:
    cfg = parse_config(args.config)
    res = evolve_run(cfg, args.out, quiet=not args.verbose)
    print(f"termination: {res.termination}  (t = {res.records[-1].t:g}, "
          f"{len(res.records)} records)")
    return EXIT_OK if res.termination == "completed" else EXIT_BLOWUP


def cmd_rates(args) -> int:
    window = tuple(args.window) if args.window else None
    fits, skipped, summary = rates_report(args.timeseries, window=window)
    out = args.out or os.path.join(os.path.dirname(os.path.abspath(args.timeseries)),
                                   "rates.csv")
    write_rates_csv(fits, out)
    for row in summary:
        if row["status"] == "skip":
            print(f"skip {row['name']}: {row['reason']}")
        else:
            print(f"{row['status']:4s} {row['name']}: exponent = {row['exponent']:+.3f} "
                  f"(expected {row['expected']})")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_characteristics(args) -> int:
    seeds = _parse_seeds(args.seeds)
    trajs, rows = characteristics_report(args.run, seeds=seeds, s_end=args.s_end,
                                         seed_time=args.seed_time, out_dir=args.out)
    for row in rows:
        print(f"traj {row['trajectory']:3d}: max|dRdr| = {row['max_dRdr']:.4g}  "
              f"max s|dWdr| = {row['max_sdWdr']:.4g}  "
              f"max E ratio = {row['max_E_ratio']:.4g}  "
              f"sup s^2 sum|c_i| = {row['sup_s2_csum']:.4g}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg_a = parse_config(args.config_a)
    cfg_b = parse_config(args.config_b)
    window = tuple(args.window) if args.window else None
    report = compare_runs(cfg_a, cfg_b, args.out, window=window)
    d = report["distances"]
    print(f"metric g H5 distance : {d['metric_g_H5']:.6g}")
    print(f"metric k H5 distance : {d['metric_k_H5']:.6g}")
    print(f"matter H^l_z distance: {d['matter_H4z']:.6g}")
    for label in ("A", "B"):
        nh = report["rates"][label].get("nohair_g")
        print(f"run {label}: termination = {report['terminations'][label]}"
              + (f", nohair_g exponent = {nh['exponent']:+.3f}" if nh else ""))
    return EXIT_OK


def cmd_convergence(args) -> int:
    cfg = parse_config(args.config)
    report = convergence_study(cfg, args.levels, args.out)
    for key, orders in report["orders"].items():
        if orders:
            pretty = ", ".join(f"{k}: {v:.2f}" for k, v in orders.items())
            print(f"{key:15s} observed order  {pretty}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "evolve": cmd_evolve,
        "rates": cmd_rates,
        "characteristics": cmd_characteristics,
        "compare": cmd_compare,
        "convergence": cmd_convergence,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as err:
        print(f"blow-up: {err}", file=sys.stderr)
        return EXIT_BLOWUP
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
