"""
Tests for the command-line front end.
"""

import json

import pytest
from typer.testing import CliRunner

from ergoflow.cli.main import app
from ergoflow.cf.loader import BUNDLED_DIR
from ergoflow.construction import ConstructionState

runner = CliRunner()


class TestVersion:
    """Tests for the version command."""

    def test_version(self):
        """Test the version banner."""
        result = runner.invoke(app, ["version"])
        assert result.exit_code == 0
        assert "ergoflow v0.1.0" in result.output


class TestConstruct:
    """Tests for the construct command."""

    def test_faithful_writes_state(self, tmp_path):
        """Test that a faithful run stops at stage 0 and saves its state."""
        result = runner.invoke(
            app, ["construct", "--mode", "faithful", "--stages", "1", "--output", str(tmp_path)]
        )
        assert result.exit_code == 0, result.output
        state = ConstructionState.load(tmp_path / "state.json")
        assert state.stage == 0
        assert not state.complete
        assert (tmp_path / "conditions.json").exists()
        assert (tmp_path / "construct.csv").exists()

    def test_relaxed_pair_needs_value(self, tmp_path):
        """Test that a malformed --relaxed pair is a usage error."""
        result = runner.invoke(app, ["construct", "--relaxed", "tau", "--output", str(tmp_path)])
        assert result.exit_code == 2

    def test_faithful_rejects_relaxed_constants(self, tmp_path):
        """Test that faithful mode refuses relaxed constants."""
        result = runner.invoke(
            app, ["construct", "--mode", "faithful", "--tau", "3", "--output", str(tmp_path)]
        )
        assert result.exit_code == 2

    def test_repeated_runs_are_identical(self, tmp_path):
        """Test that two relaxed runs write byte-identical state and report files."""
        outputs = [tmp_path / "first", tmp_path / "second"]
        for out in outputs:
            result = runner.invoke(app, ["construct", "--mode", "relaxed", "--stages", "1", "--output", str(out)])
            assert result.exit_code == 0, result.output
        for name in ("state.json", "conditions.json", "construct.csv"):
            assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes(), name


class TestVerify:
    """Tests for the verify command."""

    def test_missing_schedule(self, tmp_path):
        """Test that an unreadable schedule is a usage error."""
        result = runner.invoke(
            app, ["verify", "--schedule", str(tmp_path / "absent.txt"), "--output", str(tmp_path)]
        )
        assert result.exit_code == 2

    def test_needs_input(self, tmp_path):
        """Test that verify needs a state or a schedule."""
        result = runner.invoke(app, ["verify", "--output", str(tmp_path)])
        assert result.exit_code == 2

    def test_unknown_suite(self, schedule_file, tmp_path):
        """Test that an unknown suite name is a usage error."""
        result = runner.invoke(
            app, ["verify", "--schedule", str(schedule_file), "--suite", "nope", "--output", str(tmp_path)]
        )
        assert result.exit_code == 2

    def test_cf_suite(self, schedule_file, tmp_path):
        """Test a passing suite run and its files."""
        out = tmp_path / "out"
        result = runner.invoke(
            app, ["verify", "--schedule", str(schedule_file), "--suite", "cf", "--output", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert (out / "cf.json").exists()
        assert (out / "verify.csv").read_text().startswith("suite,k,sample,value,bound,margin,passed\n")
        assert not (out / "sums.csv").exists()
        assert not (out / "towers.json").exists()

    @pytest.mark.parametrize("alias, title", [("propC", "class"), ("lemma72", "single"), ("v123", "variations")])
    def test_suite_alias(self, alias, title, tmp_path):
        """Test that the short suite names run their suites."""
        out = tmp_path / "out"
        schedule = BUNDLED_DIR / "desk_m2.txt"
        result = runner.invoke(
            app, ["verify", "--schedule", str(schedule), "--suite", alias, "--samples", "2", "--output", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert (out / f"{title}.json").exists()

    def test_all_suites_on_desk_schedule(self, tmp_path):
        """Test that every suite passes on the bundled two-checkpoint schedule."""
        out = tmp_path / "out"
        schedule = BUNDLED_DIR / "desk_m2.txt"
        result = runner.invoke(
            app, ["verify", "--schedule", str(schedule), "--suite", "all", "--samples", "2", "--output", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert len(list(out.glob("*.json"))) == 12

    def test_seeded_runs_are_identical(self, tmp_path):
        """Test that two runs with one seed write identical reports."""
        schedule = BUNDLED_DIR / "desk_m2.txt"
        outputs = [tmp_path / "first", tmp_path / "second"]
        for out in outputs:
            result = runner.invoke(
                app,
                ["verify", "--schedule", str(schedule), "--suite", "cf,dk,ue", "--seed", "7", "--samples", "2",
                 "--output", str(out)],
            )
            assert result.exit_code == 0, result.output
        for path in sorted(outputs[0].iterdir()):
            assert path.read_bytes() == (outputs[1] / path.name).read_bytes(), path.name

    def test_tower_export(self, schedule_file, tmp_path):
        """Test that --max-level writes the tower levels."""
        out = tmp_path / "out"
        result = runner.invoke(
            app,
            ["verify", "--schedule", str(schedule_file), "--suite", "cf", "--max-level", "1", "--output", str(out)],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads((out / "towers.json").read_text())
        assert [level["m"] for level in payload["levels"]] == [0, 1]

    def test_tower_export_too_deep(self, schedule_file, tmp_path):
        """Test that a level beyond the checkpoints is a usage error."""
        result = runner.invoke(
            app,
            ["verify", "--schedule", str(schedule_file), "--suite", "cf", "--max-level", "5",
             "--output", str(tmp_path)],
        )
        assert result.exit_code == 2


class TestExport:
    """Tests for the export command."""

    def test_no_reports(self, tmp_path):
        """Test that an empty report directory is a usage error."""
        result = runner.invoke(app, ["export", "--reports", str(tmp_path)])
        assert result.exit_code == 2

    def test_missing_directory(self, tmp_path):
        """Test that a missing report directory is a usage error."""
        result = runner.invoke(app, ["export", "--reports", str(tmp_path / "absent")])
        assert result.exit_code == 2

    def test_reexport(self, schedule_file, tmp_path):
        """Test that exporting stored reports reproduces the verify table."""
        out = tmp_path / "out"
        runner.invoke(app, ["verify", "--schedule", str(schedule_file), "--suite", "cf", "--output", str(out)])
        target = tmp_path / "export.csv"
        result = runner.invoke(app, ["export", "--reports", str(out), "--output", str(target)])
        assert result.exit_code == 0, result.output
        assert target.read_bytes() == (out / "verify.csv").read_bytes()


class TestFlowAndProbe:
    """Tests for the flow and probe commands."""

    def test_flow_below_roof(self, schedule_file):
        """Test a flow step that stays below the roof."""
        result = runner.invoke(
            app,
            ["flow", "--schedule", str(schedule_file), "--x", "1/14", "--height", "1/4", "--time", "1/2",
             "--format", "json"],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert payload["x"] == "1/14"
        assert payload["level"] == 0
        assert payload["decided"] is True

    @pytest.mark.parametrize("time", ["-1", "abc"])
    def test_flow_bad_time(self, schedule_file, time):
        """Test that invalid times are usage errors."""
        result = runner.invoke(
            app, ["flow", "--schedule", str(schedule_file), "--x", "1/14", f"--time={time}"]
        )
        assert result.exit_code == 2

    def test_unknown_probe(self, schedule_file):
        """Test that an unknown probe kind is a usage error."""
        result = runner.invoke(app, ["probe", "--kind", "spectral", "--schedule", str(schedule_file)])
        assert result.exit_code == 2
