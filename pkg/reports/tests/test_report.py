import os
import subprocess
import sys

import numpy as np
import pytest

from evreport import ReportError, ReportSpec, render_report
from evreport.cli import main
from evreport.figures import REFERENCE_EXPONENTS
from evreport.reader import read_csv_columns, read_rates_rows

CONFIG = os.path.join(os.path.dirname(__file__), "..", "..", "configs",
                      "smalldata-K0.cfg")


def _write_timeseries(path, columns):
    names = list(columns)
    n = len(next(iter(columns.values())))
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for k in range(n):
            fh.write(",".join(repr(float(columns[c][k])) for c in names) + "\n")


def _power_law_run_dir(tmp_path, with_rates=True, extra=()):
    run = tmp_path / "run"
    run.mkdir()
    t = np.geomspace(1.0, 100.0, 40)
    cols = {"t": t,
            "sup_rho": 2.0 * t**-3.0,
            "sup_p": 0.1 * t**-5.0,
            "sup_j": 0.5 * t**-4.0,
            "sup_q": 0.2 * t**-5.0,
            "sup_muprime": 0.3 * t**-3.0,
            "tE0": np.full_like(t, 1.7),
            "tE1": np.full_like(t, 2.9)}
    for name in extra:
        cols[name] = 0.4 * t**-3.0
    _write_timeseries(str(run / "timeseries.csv"), cols)
    if with_rates:
        rows = [("sup_rho", -3.0, np.log(2.0)), ("sup_p", -5.0, np.log(0.1)),
                ("sup_j", -4.0, np.log(0.5)), ("sup_q", -5.0, np.log(0.2)),
                ("sup_muprime", -3.0, np.log(0.3))]
        with open(run / "rates.csv", "w") as fh:
            fh.write("name,exponent,intercept,residual,t_lo,t_hi\n")
            for name, e, c in rows:
                fh.write(f"{name},{float(e)!r},{float(c)!r},0.0,10.0,100.0\n")
    return run


def test_report_requires_timeseries(tmp_path):
    with pytest.raises(ReportError):
        render_report(ReportSpec(run_dir=str(tmp_path), report_path=str(tmp_path / "r.html")))


def test_spec_validates_format_and_figures(tmp_path):
    with pytest.raises(ReportError):
        ReportSpec(run_dir=".", report_path="r.html", fmt="pdf")
    with pytest.raises(ReportError):
        ReportSpec(run_dir=".", report_path="r.html", figures=("decay", "pie"))


def test_timeseries_only_renders_decay_and_energies(tmp_path):
    run = _power_law_run_dir(tmp_path, with_rates=False)
    out = tmp_path / "out" / "report.html"
    summary = render_report(ReportSpec(run_dir=str(run), report_path=str(out)))
    assert set(summary["figures"]) == {"decay", "energies"}
    assert (tmp_path / "out" / "decay.svg").exists()
    assert (tmp_path / "out" / "energies.svg").exists()
    skipped = " ".join(summary["notices"])
    assert "nohair" in skipped and "constraints" in skipped
    assert "characteristics" in skipped
    assert "rates.csv not found" in skipped


def test_exact_power_law_fit_coincides_with_reference(tmp_path):
    run = _power_law_run_dir(tmp_path, with_rates=True)
    out = tmp_path / "report.html"
    summary = render_report(ReportSpec(run_dir=str(run), report_path=str(out)))
    info = summary["figures"]["decay"]
    # every drawn series carries its reference slope, and the fitted slope in
    # rates.csv is numerically identical to it for exact power-law data
    rows = {r["name"]: r for r in read_rates_rows(str(run / "rates.csv"))}
    for name in info["columns"]:
        assert info["reference_slopes"][name] == REFERENCE_EXPONENTS[name]["target"]
        assert rows[name]["exponent"] == pytest.approx(
            REFERENCE_EXPONENTS[name]["target"], abs=1e-12)
    html = out.read_text()
    assert "fail" not in html.split("<h2>notices")[0] or ">fail<" not in html


def test_report_table_matches_rates_bit_for_bit(tmp_path):
    run = _power_law_run_dir(tmp_path, with_rates=True)
    out = tmp_path / "report.html"
    render_report(ReportSpec(run_dir=str(run), report_path=str(out)))
    html = out.read_text()
    for line in (run / "rates.csv").read_text().splitlines()[1:]:
        for fieldval in line.split(","):
            assert f"<td>{fieldval}</td>" in html


def test_malformed_csv_names_file_and_line(tmp_path):
    run = tmp_path / "run"
    run.mkdir()
    (run / "timeseries.csv").write_text("t,sup_rho\n1.0,2.0\n1.5\n")
    with pytest.raises(ReportError) as err:
        render_report(ReportSpec(run_dir=str(run), report_path=str(tmp_path / "r.html")))
    assert "timeseries.csv:3" in str(err.value)


def test_rendering_is_read_only_over_run_dir(tmp_path):
    run = _power_law_run_dir(tmp_path, with_rates=True)
    before = {p: os.path.getmtime(os.path.join(run, p)) for p in os.listdir(run)}
    out_dir = tmp_path / "elsewhere"
    render_report(ReportSpec(run_dir=str(run), report_path=str(out_dir / "r.html")))
    after = {p: os.path.getmtime(os.path.join(run, p)) for p in os.listdir(run)}
    assert before == after


def test_cli_roundtrip_and_errors(tmp_path, capsys):
    run = _power_law_run_dir(tmp_path, with_rates=True)
    out = tmp_path / "cli" / "report.html"
    code = main(["report", "--run", str(run), "--out", str(out), "--format", "png"])
    assert code == 0
    assert out.exists() and (tmp_path / "cli" / "decay.png").exists()
    assert main(["report", "--run", str(tmp_path / "nope"),
                 "--out", str(tmp_path / "x.html")]) == 2


@pytest.fixture(scope="session")
def smalldata_run(tmp_path_factory):
    """Reference run produced through the public CLI (no test-suite reuse)."""
    out = tmp_path_factory.mktemp("k0_run")
    subprocess.run([sys.executable, "-m", "evareal.cli", "evolve",
                    "--config", CONFIG, "--out", str(out)], check=True)
    subprocess.run([sys.executable, "-m", "evareal.cli", "rates",
                    "--timeseries", str(out / "timeseries.csv")], check=True)
    return out


def test_reference_run_report(smalldata_run, tmp_path):
    out = tmp_path / "report" / "report.html"
    summary = render_report(ReportSpec(run_dir=str(smalldata_run),
                                       report_path=str(out)))
    # decay, nohair, constraints and energies all render from the timeseries
    for name in ("decay", "nohair", "constraints", "energies"):
        assert name in summary["figures"]
    # the decay figures carry the reference slopes of the late-time theory
    assert summary["figures"]["decay"]["reference_slopes"]["sup_rho"] == -3.0
    assert summary["figures"]["nohair"]["reference_slopes"]["nohair_g"] == -3.0
    # the embedded exponent table matches rates.csv bit for bit
    html = out.read_text()
    rates_lines = (smalldata_run / "rates.csv").read_text().splitlines()[1:]
    for line in rates_lines:
        for fieldval in line.split(","):
            assert f"<td>{fieldval}</td>" in html
    # and the reference run passes every exponent band
    assert ">fail<" not in html
