"""
Report persistence and tabular export.
"""

from ergoflow.reports.export import (
    BIRKHOFF_COLUMNS,
    CORRELATION_COLUMNS,
    CRITERION_COLUMNS,
    EXPORT_COLUMNS,
    criterion_rows,
    export_reports,
    export_rows,
    render,
    sum_rows,
    write_table,
)
from ergoflow.reports.store import FileReportStore, MemoryReportStore, ReportStore, report_key

__all__ = [
    "BIRKHOFF_COLUMNS",
    "CORRELATION_COLUMNS",
    "CRITERION_COLUMNS",
    "EXPORT_COLUMNS",
    "criterion_rows",
    "export_reports",
    "export_rows",
    "render",
    "sum_rows",
    "write_table",
    "FileReportStore",
    "MemoryReportStore",
    "ReportStore",
    "report_key",
]
