"""
Tests for exact numerics, log-linear forms, reports and run configuration.
"""

from fractions import Fraction
from math import factorial

import pytest

from ergoflow.core.config import ConfigLoader, RunConfig, RunMode
from ergoflow.core.exceptions import ConfigError
from ergoflow.core.logforms import LogLinearForm, fraction_str
from ergoflow.core.numerics import (
    DyadicAccumulator,
    Enclosure,
    certify,
    default_precision_bits,
    log_enclosure,
)
from ergoflow.core.reports import (
    EXIT_FAILURE,
    EXIT_PASS,
    EXIT_UNDECIDED,
    CheckResult,
    CheckStatus,
    VerificationReport,
)
from ergoflow.core.types import parse_fraction


class TestEnclosure:
    """Tests for Enclosure arithmetic."""

    def test_empty_enclosure_rejected(self):
        """Test that lo > hi is rejected."""
        with pytest.raises(ValueError):
            Enclosure(Fraction(1), Fraction(0))

    def test_sign(self):
        """Test sign decisions."""
        assert Enclosure(Fraction(1, 3), Fraction(1, 2)).sign() == 1
        assert Enclosure(Fraction(-1), Fraction(-1, 2)).sign() == -1
        assert Enclosure.exact(0).sign() == 0
        assert Enclosure(Fraction(-1), Fraction(1)).sign() is None

    def test_round_out_contains_original(self):
        """Test that outward rounding keeps the original interval."""
        e = Enclosure(Fraction(1, 3), Fraction(2, 3)).round_out(8)
        assert e.lo <= Fraction(1, 3)
        assert e.hi >= Fraction(2, 3)
        assert e.lo.denominator <= 256

    def test_log_enclosure(self):
        """Test that log 2 is enclosed tightly."""
        e = log_enclosure(2, 64)
        assert e.lo > Fraction("0.6931471805")
        assert e.hi < Fraction("0.6931471806")

    def test_log_of_one_is_exact(self):
        """Test that log 1 is exactly zero."""
        assert log_enclosure(1).is_exact

    def test_log_of_nonpositive_rejected(self):
        """Test that log of zero raises."""
        with pytest.raises(ValueError):
            log_enclosure(0)


class TestDyadicAccumulator:
    """Tests for DyadicAccumulator."""

    def test_sum_is_enclosed(self):
        """Test that three thirds enclose one."""
        acc = DyadicAccumulator(bits=64)
        for _ in range(3):
            acc.add(Fraction(1, 3))
        assert acc.count == 3
        assert acc.enclosure().contains(1)

    def test_add_enclosure(self):
        """Test adding an enclosure term."""
        acc = DyadicAccumulator(bits=64)
        acc.add(Enclosure(Fraction(1, 4), Fraction(1, 2)))
        e = acc.enclosure()
        assert e.lo == Fraction(1, 4)
        assert e.hi == Fraction(1, 2)


class TestCertify:
    """Tests for precision escalation."""

    def test_decided_pass(self):
        """Test a positive margin passes at the first precision."""
        verdict = certify(lambda bits: Enclosure.exact(1), start_bits=64)
        assert verdict.passed
        assert verdict.precision_bits == 64

    def test_decided_fail(self):
        """Test a negative margin fails."""
        verdict = certify(lambda bits: Enclosure.exact(-1), start_bits=64)
        assert verdict.failed
        assert not verdict.passed

    def test_undecided_at_cap(self):
        """Test a straddling margin is undecided at the cap."""
        verdict = certify(lambda bits: Enclosure(Fraction(-1), Fraction(1)), start_bits=64, cap_bits=128)
        assert not verdict.decided
        assert verdict.precision_bits == 128

    def test_escalation_decides(self):
        """Test that a margin resolving at higher precision is decided there."""
        verdict = certify(
            lambda bits: Enclosure(Fraction(-1, bits), Fraction(1)) if bits < 256 else Enclosure.exact(1),
            start_bits=64,
        )
        assert verdict.passed
        assert verdict.precision_bits == 256

    def test_precision_env_override(self, monkeypatch):
        """Test the precision environment variable."""
        monkeypatch.setenv("ERGOFLOW_PRECISION_BITS", "256")
        assert default_precision_bits() == 256
        monkeypatch.setenv("ERGOFLOW_PRECISION_BITS", "8")
        assert default_precision_bits() == 128
        monkeypatch.setenv("ERGOFLOW_PRECISION_BITS", "many")
        assert default_precision_bits() == 128


class TestLogLinearForm:
    """Tests for LogLinearForm."""

    def test_exact_zero(self):
        """Test that log 4 - 2 log 2 is exactly zero."""
        form = LogLinearForm.log(4) - LogLinearForm.log(2, 2)
        assert form.is_zero() is True
        assert form.sign() == 0
        assert form.certify_nonnegative().passed

    def test_nonzero_constant(self):
        """Test that a nonzero constant is never zero."""
        form = LogLinearForm.log(3) + 1
        assert form.is_zero() is False
        assert form.sign() == 1

    def test_sign_of_difference(self):
        """Test the sign of log 3 - log 2 - 1/2."""
        form = LogLinearForm.log(3) - LogLinearForm.log(2) - Fraction(1, 2)
        assert form.sign(start_bits=64) == -1

    def test_scaling(self):
        """Test multiplication and division by rationals."""
        form = (LogLinearForm.log(2) * 6) / 3
        assert (form - LogLinearForm.log(4)).is_zero() is True

    def test_large_form_enclosed_term_by_term(self):
        """Test that a form with many terms is enclosed without grouping its arguments."""
        form = LogLinearForm.sum(LogLinearForm.log(n) for n in range(2, 302))
        assert len(form.terms) == 300
        grouped = LogLinearForm.log(factorial(301))
        for bits in (64, 128):
            enclosure = form.enclose(bits)
            assert enclosure.width < Fraction(1, 2**40)
            reference = grouped.enclose(bits + 32)
            assert enclosure.lo <= reference.hi and reference.lo <= enclosure.hi

    def test_payload_round_trip(self):
        """Test that the symbolic payload restores the form."""
        form = LogLinearForm.log(Fraction(7, 3), Fraction(1, 2)) + Fraction(5, 4)
        restored = LogLinearForm.from_payload(form.to_payload(64))
        assert (restored - form).is_zero() is True

    def test_fraction_str(self):
        """Test exact rendering."""
        assert fraction_str(Fraction(6, 4)) == "3/2"
        assert fraction_str(5) == "5"


class TestParseFraction:
    """Tests for parse_fraction."""

    def test_accepted_forms(self):
        """Test strings, ints and floats."""
        assert parse_fraction("3/7") == Fraction(3, 7)
        assert parse_fraction(2) == Fraction(2)
        assert parse_fraction(0.1) == Fraction(1, 10)

    def test_rejected_forms(self):
        """Test booleans and garbage are rejected."""
        with pytest.raises(ValueError):
            parse_fraction(True)
        with pytest.raises(ValueError):
            parse_fraction("not/a/number")


class TestVerificationReport:
    """Tests for VerificationReport."""

    def test_summary_and_exit_codes(self):
        """Test summary counts and exit codes."""
        report = VerificationReport(title="demo")
        report.add(CheckResult.exact("a", True, value=1, bound=2))
        report.add(CheckResult.info("b", value="x"))
        report.compute_summary()
        assert report.summary[CheckStatus.PASSED.value] == 1
        assert report.summary[CheckStatus.INFO.value] == 1
        assert report.passed
        assert report.exit_code() == EXIT_PASS

        report.add(CheckResult.from_verdict("c", certify(lambda b: Enclosure(Fraction(-1), Fraction(1)), 64, 64)))
        assert report.exit_code() == EXIT_UNDECIDED

        report.add(CheckResult.exact("d", False))
        assert report.exit_code() == EXIT_FAILURE
        assert [c.name for c in report.failures()] == ["d"]

    def test_extend_merges_constants(self):
        """Test that extend keeps existing constants."""
        left = VerificationReport(title="left").with_constants(c=Fraction(1, 32))
        right = VerificationReport(title="right").with_constants(c=1, C=5)
        right.add(CheckResult.info("r"))
        left.extend(right)
        assert left.constants == {"c": "1/32", "C": "5"}
        assert len(left.by_name("r")) == 1


class TestRunConfig:
    """Tests for RunConfig and ConfigLoader."""

    def test_defaults(self):
        """Test default values."""
        config = RunConfig()
        assert config.mode == RunMode.RELAXED
        assert config.relaxed_params == {}
        assert config.workers == 1

    def test_relaxed_section(self):
        """Test that a relaxed section fills relaxed_params."""
        config = ConfigLoader.load_from_dict({"run": {"stages": 2}, "relaxed": {"tau": 5}})
        assert config.stages == 2
        assert config.relaxed_params == {"tau": "5"}

    def test_faithful_rejects_relaxed_constants(self):
        """Test that faithful mode refuses relaxed constants."""
        with pytest.raises(ConfigError):
            ConfigLoader.load_from_dict({"run": {"mode": "faithful", "relaxed_params": {"K": "2"}}})

    def test_low_precision_rejected(self):
        """Test the precision floor."""
        with pytest.raises(ConfigError):
            ConfigLoader.load_from_dict({"precision_bits": 16})

    def test_merged_overrides(self):
        """Test that None overrides are ignored."""
        config = RunConfig(seed=7).merged(seed=None, workers=4)
        assert config.seed == 7
        assert config.workers == 4

    def test_yaml_file(self, tmp_path):
        """Test loading a YAML config file."""
        path = tmp_path / "run.yaml"
        path.write_text("run:\n  command: construct\n  stages: 3\n  seed: 11\n")
        config = ConfigLoader.load_from_yaml(path)
        assert config.stages == 3
        assert config.seed == 11

    def test_missing_yaml_file(self, tmp_path):
        """Test that a missing file raises ConfigError."""
        with pytest.raises(ConfigError):
            ConfigLoader.load_from_yaml(tmp_path / "absent.yaml")
