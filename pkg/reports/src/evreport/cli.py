"""Command-line entry: evreport report --run <dir> --out <path> --format svg"""

from __future__ import annotations

import argparse
import sys

from .report import ALL_FIGURES, ReportError, ReportSpec, render_report


def build_parser():
    p = argparse.ArgumentParser(prog="evreport",
                                description="render figures and a run report "
                                            "from evareal CSV artifacts")
    sub = p.add_subparsers(dest="command", required=True)
    pr = sub.add_parser("report", help="render a single-page run report")
    pr.add_argument("--run", required=True, help="run directory")
    pr.add_argument("--out", required=True, help="report HTML path")
    pr.add_argument("--format", default="svg", choices=("png", "svg"))
    pr.add_argument("--figures", nargs="+", default=list(ALL_FIGURES),
                    choices=ALL_FIGURES)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = ReportSpec(run_dir=args.run, report_path=args.out,
                          figures=tuple(args.figures), fmt=args.format)
        summary = render_report(spec)
    except ReportError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return 4
    for notice in summary["notices"]:
        print(f"notice: {notice}")
    print(f"wrote {summary['report_path']} "
          f"({len(summary['figures'])} figures)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
