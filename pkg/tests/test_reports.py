"""
Tests for report storage and tabular export.
"""

import json
from fractions import Fraction

import pytest

from ergoflow.birkhoff.engine import dk_check
from ergoflow.birkhoff.models import PiecewiseFunction
from ergoflow.core.config import OutputFormat
from ergoflow.core.reports import CheckResult, VerificationReport
from ergoflow.reports import (
    BIRKHOFF_COLUMNS,
    CRITERION_COLUMNS,
    EXPORT_COLUMNS,
    FileReportStore,
    MemoryReportStore,
    criterion_rows,
    export_reports,
    export_rows,
    render,
    report_key,
    sum_rows,
    write_table,
)


@pytest.fixture
def reports() -> list[VerificationReport]:
    """Provide two small reports, deliberately out of title order."""
    tower = VerificationReport(title="tower")
    tower.add(CheckResult.exact("tower.invariance", True, value=Fraction(1, 2), bound=Fraction(1, 2), k=2))
    tower.add(CheckResult.exact("tower.involution", False, k=1, sample="(1/3, 0)"))
    tower.compute_summary()
    cf = VerificationReport(title="cf")
    cf.add(CheckResult.info("cf.q", value=7, k=3))
    cf.compute_summary()
    return [tower, cf]


@pytest.fixture
def sum_report() -> VerificationReport:
    """Provide a report built from Denjoy-Koksma sums."""
    report = VerificationReport(title="dk")
    step = PiecewiseFunction.step([(0, Fraction(1, 2), 1)], label="half")
    for row in dk_check(step, Fraction(4, 7), 2, [Fraction(1, 14), Fraction(3, 14)], bits=64):
        report.add_sum(row)
    report.compute_summary()
    return report


class TestReportKey:
    """Tests for report keys."""

    @pytest.mark.parametrize(
        "title,key",
        [
            ("tower", "tower"),
            ("criterion.k1", "criterion.k1"),
            ("gamma' and gamma'' sums", "gamma_and_gamma_sums"),
            ("///", "report"),
        ],
    )
    def test_keys(self, title, key):
        """Test that keys are file-safe."""
        assert report_key(title) == key


class TestMemoryReportStore:
    """Tests for the in-memory store."""

    def test_save_and_get(self, reports):
        """Test saving and retrieving by key."""
        store = MemoryReportStore()
        key = store.save(reports[0])
        assert key == "tower"
        assert store.get("tower") is reports[0]
        assert store.get("missing") is None

    def test_list_sorted(self, reports):
        """Test that listing is sorted by key."""
        store = MemoryReportStore()
        for report in reports:
            store.save(report)
        assert [r.title for r in store.list_reports()] == ["cf", "tower"]
        assert store.count == 2
        store.clear()
        assert store.count == 0


class TestFileReportStore:
    """Tests for the file-backed store."""

    def test_round_trip(self, reports, tmp_path):
        """Test that a stored report loads back equal."""
        store = FileReportStore(tmp_path / "reports")
        key = store.save(reports[0])
        loaded = store.get(key)
        assert loaded == reports[0]
        assert loaded.failures()[0].name == "tower.involution"

    def test_same_bytes(self, reports, tmp_path):
        """Test that saving twice writes identical files."""
        store = FileReportStore(tmp_path)
        store.save(reports[0])
        first = (tmp_path / "tower.json").read_bytes()
        store.save(reports[0])
        assert (tmp_path / "tower.json").read_bytes() == first

    def test_skips_foreign_files(self, reports, tmp_path):
        """Test that non-report JSON files are ignored."""
        store = FileReportStore(tmp_path)
        store.save(reports[1])
        (tmp_path / "state.json").write_text(json.dumps({"stage": 1}))
        (tmp_path / "broken.json").write_text("{")
        assert [r.title for r in store.list_reports()] == ["cf"]

    def test_delete(self, reports, tmp_path):
        """Test deleting a stored report."""
        store = FileReportStore(tmp_path)
        store.save(reports[0])
        assert store.delete("tower") is True
        assert store.delete("tower") is False
        assert store.count == 0

    def test_sum_rows_persist(self, sum_report, tmp_path):
        """Test that Birkhoff-sum rows survive storage."""
        store = FileReportStore(tmp_path)
        loaded = store.get(store.save(sum_report))
        assert loaded.sums == json.loads(json.dumps(sum_report.sums))


class TestExport:
    """Tests for the tabular writers."""

    def test_rows_sorted(self, reports):
        """Test that rows are sorted by suite, then k."""
        rows = export_rows(reports)
        assert [(r["suite"], r["k"]) for r in rows] == [("cf", "3"), ("tower", "1"), ("tower", "2")]
        assert rows[1]["passed"] == "false"
        assert rows[0]["passed"] == "true"

    def test_csv(self, reports):
        """Test the CSV header and cells."""
        text = render(export_rows(reports), EXPORT_COLUMNS, OutputFormat.csv)
        lines = text.splitlines()
        assert lines[0] == ",".join(EXPORT_COLUMNS)
        assert lines[1] == "cf,3,,7,,,true"
        assert lines[3] == "tower,2,,1/2,1/2,,true"

    def test_json(self, reports):
        """Test the JSON array."""
        payload = json.loads(render(export_rows(reports), EXPORT_COLUMNS, OutputFormat.json))
        assert len(payload) == 3
        assert list(payload[0]) == list(EXPORT_COLUMNS)

    def test_reexport_identical(self, reports, tmp_path):
        """Test that exporting stored reports reproduces the direct export byte for byte."""
        store = FileReportStore(tmp_path / "reports")
        for report in reports:
            store.save(report)
        direct = export_reports(reports, OutputFormat.csv, tmp_path / "direct.csv")
        again = export_reports(store.list_reports(), OutputFormat.csv, tmp_path / "again.csv")
        assert direct == again
        assert (tmp_path / "direct.csv").read_bytes() == (tmp_path / "again.csv").read_bytes()

    def test_sum_table(self, sum_report):
        """Test the Birkhoff-sum table."""
        rows = sum_rows([sum_report])
        assert len(rows) == 2
        assert len(sum_report.checks) == 2
        text = write_table(rows, BIRKHOFF_COLUMNS, OutputFormat.csv)
        lines = text.splitlines()
        assert lines[0] == ",".join(BIRKHOFF_COLUMNS)
        assert lines[1].startswith("1/14,0,2,2,")

    def test_criterion_table(self):
        """Test that only criterion rows reach the criterion table."""
        report = VerificationReport(title="crit")
        report.add(
            CheckResult.exact("clearance", True, value=1, bound=Fraction(1, 2), margin=Fraction(1, 2), k=1)
        )
        report.add(CheckResult.info("criterion.scope"))
        rows = criterion_rows(report)
        assert rows == [{"condition": "clearance", "k": "1", "margin": "1/2", "bound": "1/2"}]
        text = render(rows, CRITERION_COLUMNS, OutputFormat.csv)
        assert text == "condition,k,margin,bound\nclearance,1,1/2,1/2\n"

    def test_write_creates_directories(self, reports, tmp_path):
        """Test that writing a table creates its directory."""
        path = tmp_path / "nested" / "out.csv"
        export_reports(reports, OutputFormat.csv, path)
        assert path.exists()
