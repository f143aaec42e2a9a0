"""Single-page HTML run report assembled from the CSV artifacts.

Rendering is strictly read-only over the run directory: every figure and
the page itself land next to the requested report path.  The exponent
table embeds the rates.csv fields verbatim (raw strings, not re-formatted
floats), with a pass/fail verdict against the reference exponents.
"""

from __future__ import annotations

import html
import json
import os
from dataclasses import dataclass, field

from . import figures as figs
from .reader import ReportError, read_csv_columns, read_rates_rows

ALL_FIGURES = ("decay", "nohair", "constraints", "energies", "characteristics")


@dataclass
class ReportSpec:
    run_dir: str
    report_path: str
    figures: tuple = ALL_FIGURES
    fmt: str = "svg"

    def __post_init__(self):
        if self.fmt not in ("png", "svg"):
            raise ReportError(f"unsupported figure format {self.fmt!r}")
        unknown = [f for f in self.figures if f not in ALL_FIGURES]
        if unknown:
            raise ReportError(f"unknown figures requested: {', '.join(unknown)}")


def _status(name, exponent):
    ref = figs.REFERENCE_EXPONENTS.get(name)
    if ref is None:
        return "n/a"
    if ref["mode"] == "band":
        return "pass" if abs(exponent - ref["target"]) <= ref["tol"] else "fail"
    return "pass" if exponent <= ref["bound"] else "fail"


def _expected_label(name):
    ref = figs.REFERENCE_EXPONENTS.get(name)
    if ref is None:
        return ""
    if ref["mode"] == "band":
        return f"{ref['target']} &plusmn; {ref['tol']}"
    return f"&le; {ref['bound']} (target {ref['target']})"


def render_report(spec: ReportSpec) -> dict:
    """Render the requested figures plus the HTML page; returns a summary
    with per-figure metadata and the list of skip notices."""
    ts_path = os.path.join(spec.run_dir, "timeseries.csv")
    if not os.path.exists(ts_path):
        raise ReportError(f"{spec.run_dir}: missing timeseries.csv")
    timeseries = read_csv_columns(ts_path)

    rates_rows = None
    rates_path = os.path.join(spec.run_dir, "rates.csv")
    notices = []
    if os.path.exists(rates_path):
        rates_rows = read_rates_rows(rates_path)
    else:
        notices.append("rates.csv not found: exponent table and fit overlays skipped")

    out_dir = os.path.dirname(os.path.abspath(spec.report_path)) or "."
    os.makedirs(out_dir, exist_ok=True)

    rendered = {}
    for name in spec.figures:
        path = os.path.join(out_dir, f"{name}.{spec.fmt}")
        if name == "decay":
            info = figs.decay_figure(timeseries, rates_rows, path)
        elif name == "nohair":
            info = figs.nohair_figure(timeseries, rates_rows, path)
        elif name == "constraints":
            info = figs.constraints_figure(timeseries, path)
        elif name == "energies":
            info = figs.energies_figure(timeseries, path)
        else:
            info = figs.characteristics_figure(spec.run_dir, path)
        if info is None:
            notices.append(f"figure {name!r} skipped: no usable input in {spec.run_dir}")
        else:
            rendered[name] = info

    manifest = None
    man_path = os.path.join(spec.run_dir, "manifest.json")
    if os.path.exists(man_path):
        with open(man_path) as fh:
            manifest = json.load(fh)

    _write_html(spec, timeseries, rates_rows, rendered, notices, manifest)
    return {"figures": rendered, "notices": notices,
            "report_path": spec.report_path}


def _write_html(spec, timeseries, rates_rows, rendered, notices, manifest):
    parts = ["<!DOCTYPE html><html><head><meta charset='utf-8'>"
             "<title>run report</title>"
             "<style>body{font-family:sans-serif;max-width:70em;margin:2em auto;}"
             "table{border-collapse:collapse;}td,th{border:1px solid #999;"
             "padding:0.3em 0.6em;font-family:monospace;font-size:0.85em;}"
             ".pass{background:#d4edd4;}.fail{background:#f3c4c4;}"
             "img{max-width:100%;}</style></head><body>"]
    parts.append(f"<h1>run report: {html.escape(os.path.abspath(spec.run_dir))}</h1>")
    if manifest is not None:
        parts.append("<p>termination: <b>%s</b>, t_last = %s, version %s</p>" % (
            html.escape(str(manifest.get("termination"))),
            html.escape(str(manifest.get("t_last"))),
            html.escape(str(manifest.get("version")))))
    t = timeseries.get("t")
    if t is not None and len(t):
        parts.append(f"<p>{len(t)} records, t in [{t[0]:g}, {t[-1]:g}]</p>")

    if rates_rows is not None:
        parts.append("<h2>fitted decay exponents</h2><table><tr>"
                     "<th>name</th><th>exponent</th><th>intercept</th>"
                     "<th>residual</th><th>t_lo</th><th>t_hi</th>"
                     "<th>expected</th><th>status</th></tr>")
        for row in rates_rows:
            status = _status(row["name"], row["exponent"])
            cells = "".join(f"<td>{html.escape(row['raw'][k])}</td>"
                            for k in ("name", "exponent", "intercept",
                                      "residual", "t_lo", "t_hi"))
            parts.append(f"<tr class='{status}'>{cells}"
                         f"<td>{_expected_label(row['name'])}</td>"
                         f"<td>{status}</td></tr>")
        parts.append("</table>")

    if notices:
        parts.append("<h2>notices</h2><ul>")
        parts.extend(f"<li>{html.escape(n)}</li>" for n in notices)
        parts.append("</ul>")

    for name in spec.figures:
        if name in rendered:
            rel = os.path.basename(rendered[name]["path"])
            parts.append(f"<h2>{name}</h2><img src='{html.escape(rel)}' alt='{name}'>")

    parts.append("</body></html>")
    with open(spec.report_path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
