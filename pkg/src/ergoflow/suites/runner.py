"""
Suite runner.

Runs a selection of suites over one context, fanning out over worker threads
and returning the reports in registry order.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Optional

import structlog

from ergoflow.core.exceptions import ConfigError
from ergoflow.core.reports import VerificationReport
from ergoflow.suites.base import SuiteContext, VerificationSuite
from ergoflow.suites.builtin import get_all_suites

logger = structlog.get_logger(__name__)

# alternative names accepted by --suite
SUITE_ALIASES = {
    "v123": "variations",
    "lemma72": "single",
    "propC": "class",
}


class SuiteRunner:
    """Runs verification suites by name."""

    def __init__(self, suites: Optional[list[VerificationSuite]] = None) -> None:
        """
        Initialize the runner.

        Args:
            suites: Suites to choose from. Defaults to all built-in suites.
        """
        self.suites = get_all_suites() if suites is None else suites
        logger.info("SuiteRunner initialized", suite_count=len(self.suites))

    @property
    def names(self) -> list[str]:
        return [suite.name for suite in self.suites]

    def select(self, names: Optional[Iterable[str]] = None) -> list[VerificationSuite]:
        """
        Suites matching the names, in registry order; all when names is None or 'all'.

        Names in SUITE_ALIASES select the suite they stand for.

        Raises:
            ConfigError: If a name is unknown.
        """
        if names is None:
            return list(self.suites)
        wanted = {SUITE_ALIASES.get(n.strip(), n.strip()) for n in names if n.strip()}
        if "all" in wanted:
            return list(self.suites)
        unknown = wanted - set(self.names)
        if unknown:
            raise ConfigError(
                f"Unknown suite(s) {sorted(unknown)}; choose from {self.names} or {sorted(SUITE_ALIASES)}"
            )
        return [suite for suite in self.suites if suite.name in wanted]

    def run(self, context: SuiteContext, names: Optional[Iterable[str]] = None) -> list[VerificationReport]:
        """
        Run the selected suites.

        Suites run concurrently when context.workers > 1; the reports keep the
        registry order either way.
        """
        selected = self.select(names)
        start = time.time()

        def run_one(suite: VerificationSuite) -> VerificationReport:
            report = suite.run(context)
            logger.info(
                "Suite finished",
                suite=suite.name,
                checks=len(report.checks),
                failures=len(report.failures()),
                undecided=report.undecided,
            )
            return report

        with ThreadPoolExecutor(max_workers=min(context.workers, max(1, len(selected)))) as executor:
            reports = list(executor.map(run_one, selected))
        logger.info("Suites run", suites=[s.name for s in selected], duration=round(time.time() - start, 3))
        return reports
