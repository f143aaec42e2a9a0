"""Post-processing figures and single-page reports for run directories."""

__version__ = "0.1.0"

from .reader import ReportError, read_csv_columns, read_rates_rows
from .report import ALL_FIGURES, ReportSpec, render_report

__all__ = ["ReportError", "ReportSpec", "ALL_FIGURES", "render_report",
           "read_csv_columns", "read_rates_rows", "__version__"]
