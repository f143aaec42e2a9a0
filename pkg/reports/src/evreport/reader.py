"""CSV readers for run artifacts.  Parse failures carry file and line number."""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = ["ReportError", "read_csv_columns", "read_rates_rows"]


class ReportError(RuntimeError):
    pass


def read_csv_columns(path: str) -> dict[str, np.ndarray]:
    """Read a numeric CSV with a header row; empty fields become nan."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ReportError(f"{path}:1: empty file")
    header = lines[0].split(",")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise ReportError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(parts)}")
        try:
            rows.append([float(p) if p != "" else math.nan for p in parts])
        except ValueError as err:
            raise ReportError(f"{path}:{lineno}: {err}") from None
    data = np.asarray(rows, dtype=float).reshape(len(rows), len(header))
    return {name: data[:, k] for k, name in enumerate(header)}


def read_rates_rows(path: str) -> list[dict]:
    """Read rates.csv keeping the raw field strings (the report embeds them
    verbatim) alongside parsed floats."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ReportError(f"{path}:1: empty file")
    header = lines[0].split(",")
    expected = ["name", "exponent", "intercept", "residual", "t_lo", "t_hi"]
    if header != expected:
        raise ReportError(f"{path}:1: expected header {','.join(expected)}")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise ReportError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(parts)}")
        row = {"raw": dict(zip(header, parts)), "name": parts[0]}
        try:
            for key, val in zip(header[1:], parts[1:]):
                row[key] = float(val)
        except ValueError as err:
            raise ReportError(f"{path}:{lineno}: {err}") from None
        out.append(row)
    return out
