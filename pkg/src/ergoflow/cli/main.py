"""
ergoflow CLI

Command-line front end for the construction, the verification suites, the
flow and the diagnostics. Exit codes: 0 pass, 1 margin failure or infeasible
stage, 2 usage or input error, 3 undecided at the precision cap.
"""

import json
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

import structlog
import typer
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from ergoflow.cf.loader import ScheduleLoader
from ergoflow.cf.models import DigitSchedule
from ergoflow.construction import ConstructionParams, ConstructionState, attach_witnesses, conditions_report, construct
from ergoflow.core.config import CommandName, ConfigLoader, OutputFormat, RunConfig, RunMode
from ergoflow.core.exceptions import ErgoflowError, StageInfeasibleError
from ergoflow.core.log import configure_logging
from ergoflow.core.logforms import fraction_str
from ergoflow.core.reports import (
    EXIT_FAILURE,
    EXIT_PASS,
    EXIT_UNDECIDED,
    EXIT_USAGE,
    CheckResult,
    CheckStatus,
    VerificationReport,
)
from ergoflow.core.types import parse_fraction
from ergoflow.flow.models import FlowObservable
from ergoflow.flow.probes import correlation_probe, recurrence_times, ue_probe
from ergoflow.flow.special import flow_advance, flow_point
from ergoflow.geometry.intervals import TorusIntervalSet
from ergoflow.geometry.models import TorusPoint
from ergoflow.reports.export import (
    BIRKHOFF_COLUMNS,
    CORRELATION_COLUMNS,
    CRITERION_COLUMNS,
    EXPORT_COLUMNS,
    criterion_rows,
    export_reports,
    export_rows,
    sum_rows,
    write_table,
)
from ergoflow.reports.store import FileReportStore
from ergoflow.roof.functions import roof_spec_for
from ergoflow.skew.tower import tower_payload, tower_sequence
from ergoflow.suites import SuiteContext, SuiteRunner
from ergoflow.suites.base import DEFAULT_A

logger = structlog.get_logger(__name__)

app = typer.Typer(
    name="ergoflow",
    help="ergoflow - construction and verification lab for a non-mixing special flow",
)
console = Console()
err_console = Console(stderr=True)

DEFAULT_OUTPUT = Path("ergoflow-out")
STATE_FILE = "state.json"

STATUS_COLORS = {
    "passed": "green",
    "failed": "red bold",
    "undecided": "yellow",
    "info": "dim",
}


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable debug logging on stderr"),
) -> None:
    """Construct the angle, verify its inequalities, run the flow."""
    configure_logging(verbose)


# helpers


def _fail(message: str, code: int = EXIT_USAGE) -> None:
    err_console.print(f"[red]Error: {message}[/red]")
    raise typer.Exit(code)


def _run_config(config_file: Optional[Path], command: CommandName, **flags) -> RunConfig:
    """File values first, then command-line flags."""
    try:
        base = ConfigLoader.load_from_yaml(config_file) if config_file else RunConfig(command=command)
        return base.merged(command=command, **flags)
    except ErgoflowError as exc:
        _fail(str(exc))


def _relaxed_pairs(pairs: Optional[list[str]]) -> Optional[dict[str, str]]:
    if not pairs:
        return None
    params = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            _fail(f"--relaxed expects KEY=VALUE, got {pair!r}")
        params[key.strip()] = value.strip()
    return params


def _load_schedule(path: Path) -> DigitSchedule:
    try:
        return ScheduleLoader.load_from_file(path)
    except ErgoflowError as exc:
        _fail(str(exc))


def _load_state(path: Path) -> ConstructionState:
    try:
        return ConstructionState.load(path)
    except ErgoflowError as exc:
        _fail(str(exc))
    except (ValueError, KeyError) as exc:
        _fail(f"cannot read state file {path}: {exc}")


def _inputs(
    state_file: Optional[Path], schedule_file: Optional[Path]
) -> tuple[Optional[ConstructionState], DigitSchedule]:
    if state_file is not None:
        state = _load_state(state_file)
        return state, state.schedule
    if schedule_file is not None:
        return None, _load_schedule(schedule_file)
    _fail("pass --state or --schedule")


def _print_report(report: VerificationReport, show_all: bool = False) -> None:
    """Margin table of a report; passing rows only when show_all is set."""
    table = Table(title=report.title, show_header=True)
    for column in ("check", "k", "sample", "value", "bound", "margin", "status"):
        table.add_column(column, overflow="fold")
    for check in report.checks:
        if not show_all and check.status in (CheckStatus.PASSED, CheckStatus.INFO):
            continue
        color = STATUS_COLORS[check.status.value]
        table.add_row(
            check.name,
            "" if check.k is None else str(check.k),
            check.sample,
            check.value,
            check.bound,
            check.margin,
            f"[{color}]{check.status.value}[/{color}]",
        )
    console.print(table)
    summary = ", ".join(f"{key}: {value}" for key, value in report.summary.items() if value)
    console.print(f"[bold]{report.title}[/bold] {summary}")


def _combined_exit(reports: list[VerificationReport]) -> int:
    codes = [report.exit_code() for report in reports]
    if EXIT_FAILURE in codes:
        return EXIT_FAILURE
    if EXIT_UNDECIDED in codes:
        return EXIT_UNDECIDED
    return EXIT_PASS


# commands


@app.command(name="construct")
def cmd_construct(
    stages: Optional[int] = typer.Option(None, "--stages", help="Number of stages to build"),
    mode: Optional[RunMode] = typer.Option(None, "--mode", help="faithful or relaxed constants (default relaxed)"),
    tau: Optional[str] = typer.Option(None, "--tau", help="Window multiplier (relaxed mode)"),
    relaxed: Optional[List[str]] = typer.Option(None, "--relaxed", help="Relaxed constant KEY=VALUE"),
    schedule: Optional[Path] = typer.Option(None, "--schedule", help="Schedule to compare the built digits with"),
    precision_bits: Optional[int] = typer.Option(None, "--precision-bits", help="Starting precision"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Worker threads"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Output directory"),
    fmt: Optional[OutputFormat] = typer.Option(None, "--format", help="Table format"),
    witnesses: bool = typer.Option(True, "--witnesses/--no-witnesses", help="Search witness points"),
    config_file: Optional[Path] = typer.Option(None, "--config", help="YAML run configuration"),
) -> None:
    """Build the digit schedule stage by stage and report the construction conditions."""
    config = _run_config(
        config_file,
        CommandName.CONSTRUCT,
        stages=stages,
        mode=mode,
        tau=tau,
        relaxed_params=_relaxed_pairs(relaxed),
        schedule_file=schedule,
        precision_bits=precision_bits,
        workers=workers,
        output=output,
        format=fmt,
    )
    reference = _load_schedule(config.schedule_file) if config.schedule_file else None
    try:
        params = ConstructionParams.from_run_config(config)
    except ErgoflowError as exc:
        _fail(str(exc))

    console.print(Panel.fit(f"[bold blue]ergoflow construct[/bold blue] ({config.mode.value})", border_style="blue"))
    try:
        state = construct(config.stages, params)
    except StageInfeasibleError as exc:
        _fail(str(exc), EXIT_FAILURE)

    report = conditions_report(state)
    if witnesses and state.complete and state.records:
        state, witness_report = attach_witnesses(state, config.workers)
        report.extend(witness_report)
    if reference is not None:
        n = min(reference.length, state.schedule.length)
        report.add(
            CheckResult.exact(
                "construct.schedule_prefix",
                reference.digits[:n] == state.schedule.digits[:n],
                value=n,
                detail=f"first {n} digits of {config.schedule_file}",
            )
        )
    for cert in state.magnitudes:
        console.print(f"[cyan]magnitude certificate:[/cyan] {cert.quantity} {cert.detail}")
    report.compute_summary()

    out = Path(config.output or DEFAULT_OUTPUT)
    state.save(out / STATE_FILE)
    FileReportStore(out).save(report)
    write_table(export_rows([report]), EXPORT_COLUMNS, config.format, out / f"construct.{config.format.value}")
    _print_report(report)
    console.print(f"[green]State written to {out / STATE_FILE}[/green] (stage {state.stage})")
    raise typer.Exit(report.exit_code())


@app.command(name="verify")
def cmd_verify(
    suite: Optional[str] = typer.Option(None, "--suite", help="Comma-separated suite names, or 'all'"),
    state_file: Optional[Path] = typer.Option(None, "--state", help="Construction state JSON"),
    schedule: Optional[Path] = typer.Option(None, "--schedule", help="Digit-schedule file"),
    precision_bits: Optional[int] = typer.Option(None, "--precision-bits", help="Starting precision"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Worker threads"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed for sampled checks"),
    samples: int = typer.Option(8, "--samples", help="Sample points per instance"),
    max_level: Optional[int] = typer.Option(None, "--max-level", help="Also write towers.json for levels 0..N"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Report directory"),
    fmt: Optional[OutputFormat] = typer.Option(None, "--format", help="Table format"),
    config_file: Optional[Path] = typer.Option(None, "--config", help="YAML run configuration"),
) -> None:
    """Run verification suites and write their reports."""
    config = _run_config(
        config_file,
        CommandName.VERIFY,
        suite=suite,
        schedule_file=schedule,
        precision_bits=precision_bits,
        workers=workers,
        seed=seed,
        output=output,
        format=fmt,
    )
    state, digits = _inputs(state_file, config.schedule_file)
    context = SuiteContext(
        schedule=digits,
        state=state,
        bits=config.precision_bits,
        workers=config.workers,
        seed=config.seed,
        samples=samples,
    )
    try:
        reports = SuiteRunner().run(context, (config.suite or "all").split(","))
    except ErgoflowError as exc:
        _fail(str(exc))

    out = Path(config.output or DEFAULT_OUTPUT)
    store = FileReportStore(out)
    for report in reports:
        store.save(report)
        _print_report(report)
    ext = config.format.value
    write_table(export_rows(reports), EXPORT_COLUMNS, config.format, out / f"verify.{ext}")
    sums = sum_rows(reports)
    if sums:
        write_table(sums, BIRKHOFF_COLUMNS, config.format, out / f"sums.{ext}")
    for report in reports:
        if report.title == "crit":
            write_table(criterion_rows(report), CRITERION_COLUMNS, config.format, out / f"criterion.{ext}")
    if max_level is not None:
        try:
            payload = tower_payload(tower_sequence(context.config(), max_level))
        except ErgoflowError as exc:
            _fail(str(exc))
        (out / "towers.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    raise typer.Exit(_combined_exit(reports))


@app.command(name="flow")
def cmd_flow(
    x: str = typer.Option(..., "--x", help="Base coordinate, e.g. 1/3"),
    level: int = typer.Option(0, "--level", help="Base level 0 or 1"),
    height: str = typer.Option("0", "--height", help="Starting height"),
    time: str = typer.Option(..., "--time", help="Flow time, a non-negative rational"),
    state_file: Optional[Path] = typer.Option(None, "--state", help="Construction state JSON"),
    schedule: Optional[Path] = typer.Option(None, "--schedule", help="Digit-schedule file"),
    A: Optional[str] = typer.Option(None, "--A", help="Weight of the level-1 singularity"),
    precision_bits: Optional[int] = typer.Option(None, "--precision-bits", help="Starting precision"),
    fmt: OutputFormat = typer.Option(OutputFormat.csv, "--format", help="csv prints a line, json an object"),
) -> None:
    """Advance a point of the special flow and print its base and height."""
    state, digits = _inputs(state_file, schedule)
    cfg = state.config() if state is not None else SuiteContext(schedule=digits).config()
    try:
        weight = parse_fraction(A) if A else (state.records[-1].A if state and state.records else DEFAULT_A)
        spec = roof_spec_for(cfg, weight)
        p = flow_point(spec, TorusPoint.of(parse_fraction(x), level), parse_fraction(height))
        image = flow_advance(spec, cfg, p, parse_fraction(time), precision_bits)
    except (ErgoflowError, ValueError) as exc:
        _fail(str(exc))

    enclosure = image.height_enclosure(precision_bits)
    payload = {
        "x": fraction_str(image.base.x),
        "level": image.base.level,
        "height": str(image.height),
        "height_decimal": enclosure.to_decimal(),
        "decided": image.decided,
    }
    if fmt == OutputFormat.json:
        typer.echo(json.dumps(payload, indent=2))
    else:
        typer.echo(",".join(str(v) for v in payload.values()))
    raise typer.Exit(EXIT_PASS if image.decided else EXIT_UNDECIDED)


@app.command(name="probe")
def cmd_probe(
    kind: str = typer.Option("correlation", "--kind", help="correlation or ue"),
    state_file: Optional[Path] = typer.Option(None, "--state", help="Construction state JSON"),
    schedule: Optional[Path] = typer.Option(None, "--schedule", help="Digit-schedule file"),
    times: Optional[str] = typer.Option(None, "--times", help="Comma-separated flow times"),
    samples: int = typer.Option(256, "--samples", help="Monte-Carlo samples"),
    seed: int = typer.Option(0, "--seed", help="Root seed"),
    workers: int = typer.Option(1, "--workers", help="Worker threads"),
    k: Optional[int] = typer.Option(None, "--k", help="Stage of the ue probe"),
    eps: str = typer.Option("1/10", "--eps", help="Deviation threshold of the ue probe"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Table file"),
    fmt: OutputFormat = typer.Option(OutputFormat.csv, "--format", help="Table format"),
) -> None:
    """Diagnostics: correlation table of the flow, or unique-ergodicity ingredients."""
    state, digits = _inputs(state_file, schedule)
    cfg = state.config() if state is not None else SuiteContext(schedule=digits).config()

    if kind == "ue":
        top = k if k is not None else len(digits.even_checkpoints) // 2
        try:
            report = ue_probe(cfg, top, TorusIntervalSet.arc(0, Fraction(1, 2), levels=(0,)), parse_fraction(eps))
        except (ErgoflowError, ValueError) as exc:
            _fail(str(exc))
        _print_report(report, show_all=True)
        text = export_reports([report], fmt, output)
        if output is None:
            typer.echo(text, nl=False)
        raise typer.Exit(report.exit_code())
    if kind != "correlation":
        _fail(f"unknown probe kind {kind!r}")

    weight = state.records[-1].A if state and state.records else DEFAULT_A
    spec = roof_spec_for(cfg, weight)
    try:
        if times:
            chosen = [parse_fraction(t) for t in times.split(",")]
        elif state is not None and state.records:
            chosen = [Fraction(0), *recurrence_times(state)]
        else:
            chosen = [Fraction(0), Fraction(1, 2), Fraction(4)]
    except ValueError as exc:
        _fail(str(exc))
    observable = FlowObservable(base=TorusIntervalSet.arc(0, Fraction(1, 4)), height_cap=Fraction(1, 2), label="O")
    rows = correlation_probe(spec, cfg, observable, observable, chosen, samples, seed, workers)
    text = write_table([row.to_row() for row in rows], CORRELATION_COLUMNS, fmt, output)
    if output is None:
        typer.echo(text, nl=False)
    err_console.print("[dim]diagnostic only: no pass/fail[/dim]")


@app.command(name="export")
def cmd_export(
    reports_dir: Path = typer.Option(DEFAULT_OUTPUT, "--reports", help="Directory of report JSON files"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Export file; stdout when omitted"),
    fmt: OutputFormat = typer.Option(OutputFormat.csv, "--format", help="Table format"),
) -> None:
    """Merge stored reports into one tidy table."""
    if not reports_dir.is_dir():
        _fail(f"no report directory {reports_dir}")
    reports = FileReportStore(reports_dir).list_reports()
    if not reports:
        _fail(f"no reports in {reports_dir}")
    text = export_reports(reports, fmt, output)
    if output is None:
        typer.echo(text, nl=False)


@app.command()
def version() -> None:
    """Display version information."""
    from ergoflow import __version__

    console.print(f"ergoflow v{__version__}")


if __name__ == "__main__":
    app()
