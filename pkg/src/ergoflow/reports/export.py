"""
Tabular writers.

Every schema has a fixed column order; rows are sorted before writing so that
identical inputs give byte-identical files.
"""

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import structlog

from ergoflow.core.config import OutputFormat
from ergoflow.core.reports import CheckStatus, VerificationReport

logger = structlog.get_logger(__name__)

EXPORT_COLUMNS = ("suite", "k", "sample", "value", "bound", "margin", "passed")
CRITERION_COLUMNS = ("condition", "k", "margin", "bound")
CRITERION_CONDITIONS = frozenset({"clearance", "return", "derivative", "second_derivative", "partial_sums"})
CORRELATION_COLUMNS = ("t", "estimate", "stderr", "seed")
BIRKHOFF_COLUMNS = ("sample_x", "level", "n", "q_n", "value", "bound", "margin", "passed", "closest_approach")


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def export_rows(reports: Iterable[VerificationReport]) -> list[dict[str, str]]:
    """One row per (suite, k, sample) check; info rows included, sorted stably."""
    rows = []
    for report in reports:
        for check in report.checks:
            rows.append(
                {
                    "suite": report.title,
                    "k": _cell(check.k),
                    "sample": check.sample,
                    "value": check.value,
                    "bound": check.bound,
                    "margin": check.margin,
                    "passed": _cell(check.status in (CheckStatus.PASSED, CheckStatus.INFO)),
                }
            )
    # stable sort keeps check order within one (suite, k, sample)
    rows.sort(key=lambda r: (r["suite"], int(r["k"]) if r["k"] else -1, r["sample"]))
    return rows


def criterion_rows(report: VerificationReport) -> list[dict[str, str]]:
    """Margins of the criterion conditions, one row per checked instance."""
    return [
        {"condition": c.name, "k": _cell(c.k), "margin": c.margin, "bound": c.bound}
        for c in report.checks
        if c.name.split(".")[0] in CRITERION_CONDITIONS
    ]


def sum_rows(reports: Iterable[VerificationReport]) -> list[dict[str, Any]]:
    """Birkhoff-sum rows of every report, in report order."""
    return [row for report in reports for row in report.sums]


def render(rows: Sequence[dict[str, Any]], columns: Sequence[str], fmt: OutputFormat) -> str:
    """Render rows as CSV (header first) or as a JSON array."""
    if fmt == OutputFormat.json:
        payload = [{col: row.get(col) for col in columns} for row in rows]
        return json.dumps(payload, indent=2) + "\n"
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({col: _cell(row.get(col)) for col in columns})
    return buffer.getvalue()


def write_table(
    rows: Sequence[dict[str, Any]],
    columns: Sequence[str],
    fmt: OutputFormat,
    path: Optional[Path] = None,
) -> str:
    """Render and, when a path is given, write the table; returns the text."""
    text = render(rows, columns, fmt)
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        logger.info("Table written", path=str(path), rows=len(rows), format=fmt.value)
    return text


def export_reports(
    reports: Iterable[VerificationReport], fmt: OutputFormat, path: Optional[Path] = None
) -> str:
    """Merge reports into the tidy export table."""
    return write_table(export_rows(reports), EXPORT_COLUMNS, fmt, path)
