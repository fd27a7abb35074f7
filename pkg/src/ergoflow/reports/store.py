"""
Report Store

Abstract base class and implementations for storing verification reports.
"""

import json
import os
import re
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Optional

import structlog
from pydantic import ValidationError

from ergoflow.core.reports import VerificationReport

logger = structlog.get_logger(__name__)


def report_key(title: str) -> str:
    """File-safe, deterministic key for a report title."""
    key = re.sub(r"[^A-Za-z0-9._-]+", "_", title).strip("_")
    return key or "report"


class ReportStore(ABC):
    """
    Abstract base class for report storage.

    Defines the interface for saving and retrieving verification reports,
    keyed by their title.
    """

    @abstractmethod
    def save(self, report: VerificationReport) -> str:
        """
        Save a report to the store.

        Args:
            report: The report to save.

        Returns:
            The key the report is stored under.
        """

    @abstractmethod
    def get(self, key: str) -> Optional[VerificationReport]:
        """
        Retrieve a report by key.

        Returns:
            The report if found, None otherwise.
        """

    @abstractmethod
    def list_reports(self) -> list[VerificationReport]:
        """All stored reports, sorted by key."""


class MemoryReportStore(ReportStore):
    """In-memory report store for tests and one-shot runs."""

    def __init__(self) -> None:
        self._reports: dict[str, VerificationReport] = {}
        logger.info("MemoryReportStore initialized")

    def save(self, report: VerificationReport) -> str:
        key = report_key(report.title)
        self._reports[key] = report
        logger.debug("Report saved to memory", key=key, checks=len(report.checks))
        return key

    def get(self, key: str) -> Optional[VerificationReport]:
        return self._reports.get(key)

    def list_reports(self) -> list[VerificationReport]:
        return [self._reports[key] for key in sorted(self._reports)]

    def clear(self) -> None:
        """Clear all reports from memory."""
        self._reports.clear()
        logger.debug("Memory store cleared")

    @property
    def count(self) -> int:
        return len(self._reports)


class FileReportStore(ReportStore):
    """
    File-based report store.

    Each report is written to {key}.json in the storage directory; saving the
    same report twice produces the same bytes.
    """

    def __init__(self, storage_dir: str | Path) -> None:
        """
        Initialize the file-based store.

        Args:
            storage_dir: Directory path for storing report files.
        """
        self.storage_dir = Path(storage_dir)
        self.storage_dir.mkdir(parents=True, exist_ok=True)
        logger.info("FileReportStore initialized", storage_dir=str(self.storage_dir))

    def _report_path(self, key: str) -> Path:
        return self.storage_dir / f"{key}.json"

    def save(self, report: VerificationReport) -> str:
        key = report_key(report.title)
        path = self._report_path(key)
        with open(path, "w") as f:
            json.dump(report.model_dump(mode="json"), f, indent=2, sort_keys=True)
            f.write("\n")
        logger.debug("Report saved to file", key=key, path=str(path))
        return key

    def get(self, key: str) -> Optional[VerificationReport]:
        path = self._report_path(key)
        if not path.exists():
            return None
        with open(path) as f:
            data = json.load(f)
        return VerificationReport(**data)

    def list_reports(self) -> list[VerificationReport]:
        reports = []
        for path in sorted(self.storage_dir.glob("*.json")):
            try:
                with open(path) as f:
                    data = json.load(f)
                reports.append(VerificationReport(**data))
            except (json.JSONDecodeError, TypeError, ValidationError):
                logger.warning("Invalid report file", path=str(path))
                continue
        return reports

    def delete(self, key: str) -> bool:
        """
        Delete a report file.

        Returns:
            True if deleted, False if not found.
        """
        path = self._report_path(key)
        if path.exists():
            os.remove(path)
            logger.debug("Report deleted", key=key)
            return True
        return False

    @property
    def count(self) -> int:
        return len(list(self.storage_dir.glob("*.json")))
