"""CLI entry point for qamnet."""

import json
import logging
import sys
from enum import Enum
from pathlib import Path
from typing import Any, List, NoReturn, Optional, Union

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table

from qamnet.config import ConfigFormatError, ExperimentConfig, load_config
from qamnet.tools.bench import (
    ExperimentResult,
    RecallMismatchError,
    run_capacity_sweep,
    run_equivalence_check,
    run_noise_sweep,
    run_timing,
)
from qamnet.tools.encoder import (
    EncodingError,
    EncodingKind,
    StatePattern,
    decode_phase,
    encode as encode_pattern,
    pattern_stats,
    state_from_output,
)
from qamnet.tools.hologram_file import HologramFileError, load, save
from qamnet.tools.memory import (
    DEFAULT_MIN_CONFIDENCE,
    HologramError,
    build as build_hologram,
    integer_couplings,
    recall_dense,
    recall_lazy,
    recognize as recognize_state,
)
from qamnet.tools.patterns import PatternError, RawPattern, format_csv, load_patterns, state_rows, write_text
from qamnet.validation import Severity, ValidationResult, validate_hologram, validate_state

try:
    # Recent typer releases ship their own copy of click
    from typer._click.exceptions import Abort, UsageError
except ImportError:
    from click.exceptions import Abort, UsageError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_AMBIGUOUS = 1
EXIT_USAGE = 2
EXIT_DATA = 3

app = typer.Typer(
    name="qamnet",
    help="Quantum associative network: phase-encoded Hebbian memory, recall and benchmarks",
    add_completion=False,
    pretty_exceptions_enable=False,
)
console = Console(stderr=True, soft_wrap=True)
stdout_console = Console(soft_wrap=True)


class Encoding(str, Enum):
    AMPLITUDE = "amplitude"
    BIPOLAR = "bipolar"
    PHASE = "phase"


class RecallPath(str, Enum):
    DENSE = "dense"
    LAZY = "lazy"


def _exit_code(error: BaseException) -> int:
    if isinstance(error, (OSError, PatternError, EncodingError, HologramError, HologramFileError, ConfigFormatError)):
        return EXIT_DATA
    if isinstance(error, RecallMismatchError):
        return EXIT_DATA
    if isinstance(error, (ValidationError, UsageError, ValueError)):
        return EXIT_USAGE
    return EXIT_DATA


def _one_line(text: str) -> str:
    return " ".join(text.split())


def _fail(error: Union[BaseException, str], code: Optional[int] = None) -> NoReturn:
    """Print a single `Error:` line to stderr and exit."""
    if code is None:
        code = _exit_code(error) if isinstance(error, BaseException) else EXIT_DATA
    message = str(error)
    if isinstance(error, ValidationError):
        message = "; ".join(
            f"{'.'.join(str(part) for part in e['loc']) or 'config'}: {e['msg']}" for e in error.errors()
        )
    console.print(f"[red]Error:[/red] {escape(_one_line(message))}")
    sys.exit(code)


def _emit(text: str, out: Optional[Path]) -> None:
    write_text(text if text.endswith("\n") else text + "\n", out, sys.stdout)
    if out is not None:
        console.print(f"[green]✓ Written to:[/green] {escape(str(out))}")


def _encode_all(raws: List[RawPattern], encoding: Encoding, threshold: float) -> List[StatePattern]:
    states = [encode_pattern(raw, EncodingKind(encoding.value), threshold) for raw in raws]
    for k, state in enumerate(states):
        result = validate_state(state)
        if result.is_critical():
            logger.warning(f"State {k} failed validation: {[c.name for c in result.get_failed_checks()]}")
    return states


def _display_validation_result(result: ValidationResult, show_passed: bool = False) -> None:
    """Print a ValidationResult's status and failed (or all) checks to stderr."""
    console.print(f"\n[bold]Validation Status:[/bold] {result.status.value}")
    for check in result.checks:
        if not check.passed:
            icon = "✗" if check.severity == Severity.CRITICAL else "⚠"
            color = "red" if check.severity == Severity.CRITICAL else "yellow"
            console.print(f"  [{color}]{icon} {check.name}[/{color}]: {escape(check.message or '')}")
        elif show_passed:
            console.print(f"  [green]✓ {check.name}[/green]")


@app.callback()
def main_callback(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress at DEBUG level"),
):
    """Configure logging for every subcommand."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


@app.command()
def encode(
    input: Path = typer.Option(..., "--input", "-i", help="CSV or PGM pattern file"),
    encoding: Encoding = typer.Option(Encoding.PHASE, "--encoding", "-e", help="Encoding scheme"),
    threshold: float = typer.Option(0.5, "--threshold", "-t", help="Bipolar threshold (ties map to +1)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output file (default: stdout)"),
    json_output: bool = typer.Option(False, "--json", help="Emit JSON instead of CSV"),
):
    """Encode raw patterns into normalized state vectors.

    Amplitude and bipolar states are written as one CSV row of reals per
    pattern; phase states as interleaved real,imag pairs.

    Example:
        qamnet encode --input img.pgm --encoding bipolar --threshold 0.5
    """
    try:
        raws = load_patterns(input)
        states = _encode_all(raws, encoding, threshold)

        if json_output:
            payload = {
                "encoding": encoding.value,
                "dimension": states[0].dimension,
                "states": [
                    {"label": s.label, "real": s.amplitudes.real.tolist(), "imag": s.amplitudes.imag.tolist()}
                    for s in states
                ],
            }
            text = json.dumps(payload, indent=2)
        else:
            complex_pairs = encoding is Encoding.PHASE
            text = format_csv(state_rows([s.amplitudes for s in states], complex_pairs=complex_pairs))

        _emit(text, out)
        console.print(f"[green]✓ Encoded {len(states)} patterns[/green] [dim](N={states[0].dimension}, {encoding.value})[/dim]")

    except Exception as e:
        _fail(e)


@app.command()
def build(
    patterns: List[Path] = typer.Option(..., "--patterns", "-p", help="CSV or PGM pattern files (repeatable)"),
    encoding: Encoding = typer.Option(Encoding.PHASE, "--encoding", "-e", help="Encoding scheme"),
    threshold: float = typer.Option(0.5, "--threshold", "-t", help="Bipolar threshold (ties map to +1)"),
    out: Path = typer.Option(..., "--out", "-o", help="Memory file to write"),
    json_output: bool = typer.Option(False, "--json", help="Print a JSON summary to stdout"),
):
    """Encode patterns and store them in a hologram file.

    Example:
        qamnet build --patterns data.csv --encoding phase --out mem.qam
    """
    try:
        raws = [raw for path in patterns for raw in load_patterns(path)]
        hologram = build_hologram(_encode_all(raws, encoding, threshold))
        save(hologram, out)

        summary = {
            "memory": str(out),
            "encoding": encoding.value,
            "N": hologram.dimension,
            "P": hologram.pattern_count,
            "trace": hologram.trace(),
            "hermitian_residual": hologram.hermitian_residual(),
        }
        if json_output:
            typer.echo(json.dumps(summary, indent=2))

        console.print(f"[green]✓ Hologram saved to:[/green] {escape(str(out))}")
        console.print(f"[dim]N={hologram.dimension}, P={hologram.pattern_count}, trace={hologram.trace():.12g}[/dim]")

    except Exception as e:
        _fail(e)


@app.command()
def recall(
    memory: Path = typer.Option(..., "--memory", "-m", help="Memory file"),
    input: Path = typer.Option(..., "--input", "-i", help="CSV or PGM probe file"),
    encoding: Encoding = typer.Option(Encoding.PHASE, "--encoding", "-e", help="Encoding used for the probe"),
    threshold: float = typer.Option(0.5, "--threshold", "-t", help="Bipolar threshold (ties map to +1)"),
    path: RecallPath = typer.Option(RecallPath.DENSE, "--path", help="Matrix product or overlap summation"),
    decode: bool = typer.Option(False, "--decode", help="Decode the normalized output back to data values"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output file (default: stdout)"),
    json_output: bool = typer.Option(False, "--json", help="Emit JSON instead of CSV"),
):
    """Apply the memory once to each probe and write the raw output.

    The output is not renormalized; its norm shows how cleanly the probe
    matched. CSV columns: probe,component,real,imag,norm. With --decode the
    output is normalized and mapped back through the probe's own statistics
    (phase encoding only), one row of values per probe.
    """
    if decode and encoding is not Encoding.PHASE:
        _fail("--decode requires --encoding phase", EXIT_USAGE)

    try:
        hologram = load(memory)
        raws = load_patterns(input)
        states = _encode_all(raws, encoding, threshold)
        apply = recall_dense if path is RecallPath.DENSE else recall_lazy
        outputs = [apply(hologram, state) for state in states]

        decoded = []
        if decode:
            for raw, output in zip(raws, outputs):
                normalized = state_from_output(output, EncodingKind.PHASE, raw.label)
                decoded.append(decode_phase(normalized, pattern_stats(raw)).values)

        if json_output:
            payload = {
                "path": path.value,
                "outputs": [
                    {
                        "probe": i,
                        "label": raw.label,
                        "norm": float(abs(output @ output.conj()) ** 0.5),
                        "real": output.real.tolist(),
                        "imag": output.imag.tolist(),
                        **({"decoded": decoded[i].tolist()} if decode else {}),
                    }
                    for i, (raw, output) in enumerate(zip(raws, outputs))
                ],
            }
            text = json.dumps(payload, indent=2)
        elif decode:
            text = format_csv([[float(v) for v in values] for values in decoded])
        else:
            rows: List[List[Any]] = [["probe", "component", "real", "imag", "norm"]]
            for i, output in enumerate(outputs):
                norm = float(abs(output @ output.conj()) ** 0.5)
                rows.extend([i, h, float(c.real), float(c.imag), norm] for h, c in enumerate(output))
            text = format_csv(rows)

        _emit(text, out)
        console.print(f"[green]✓ Recalled {len(outputs)} probes[/green] [dim]({path.value} path)[/dim]")

    except Exception as e:
        _fail(e)


@app.command()
def recognize(
    memory: Path = typer.Option(..., "--memory", "-m", help="Memory file"),
    input: Path = typer.Option(..., "--input", "-i", help="CSV or PGM probe file"),
    encoding: Encoding = typer.Option(Encoding.PHASE, "--encoding", "-e", help="Encoding used for the probe"),
    threshold: float = typer.Option(0.5, "--threshold", "-t", help="Bipolar threshold (ties map to +1)"),
    min_confidence: float = typer.Option(
        DEFAULT_MIN_CONFIDENCE, "--min-confidence", min=0.0, max=1.0, help="Minimum |c| to accept a match"
    ),
    strict: bool = typer.Option(False, "--strict", help="Exit 1 when any probe is ambiguous"),
    json_output: bool = typer.Option(True, "--json/--no-json", help="Print the JSON report (default)"),
):
    """Match each probe against the stored patterns.

    Prints one JSON overlap report for a single probe, or a JSON array for
    several.

    Example:
        qamnet recognize --memory mem.qam --input probe.csv --strict
    """
    try:
        hologram = load(memory)
        raws = load_patterns(input)
        states = _encode_all(raws, encoding, threshold)
        decisions = [recognize_state(hologram, state, min_confidence) for state in states]
    except Exception as e:
        _fail(e)

    if json_output:
        payload = decisions[0].to_dict() if len(decisions) == 1 else [d.to_dict() for d in decisions]
        typer.echo(json.dumps(payload, indent=2))

    for i, decision in enumerate(decisions):
        report = decision.report
        if decision.recognized:
            label = hologram.labels[decision.index]
            name = f"{decision.index}" + (f" ({escape(label)})" if label else "")
            console.print(
                f"[green]✓ Probe {i}: recognized pattern {name}[/green] "
                f"[dim]confidence={report.confidence:.4f}, margin={report.margin:.4f}[/dim]"
            )
        else:
            console.print(f"[yellow]⚠ Probe {i}: ambiguous[/yellow] [dim]best confidence={report.confidence:.4f}[/dim]")

    if strict and not all(d.recognized for d in decisions):
        sys.exit(EXIT_AMBIGUOUS)


def _load_experiment(config: Path, seed: Optional[int], workers: Optional[int]) -> ExperimentConfig:
    cfg = load_config(config, seed)
    if workers is not None:
        cfg = cfg.model_copy(update={"workers": workers})
    return cfg


def _wants_json(out: Optional[Path], json_output: bool) -> bool:
    return json_output or (out is not None and out.suffix.lower() == ".json")


def _display_sweep(result: ExperimentResult) -> None:
    table = Table(title=f"{result.experiment} sweep (N={result.config.N}, {result.config.trials} trials/cell)")
    table.add_column("P", justify="right")
    table.add_column("noise", justify="right")
    table.add_column("accuracy", justify="right")
    table.add_column("95% CI", justify="right")
    table.add_column("mean |c|", justify="right")
    table.add_column("mean margin", justify="right")
    for s in result.summaries():
        table.add_row(
            str(s.P),
            f"{s.noise:g}",
            f"{s.accuracy:.3f}",
            f"[{s.accuracy_low:.3f}, {s.accuracy_high:.3f}]",
            f"{s.mean_confidence:.4f}",
            f"{s.mean_margin:.4f} ± {s.margin_stderr:.4f}",
        )
    console.print(table)


def _sweep_command(runner, config: Path, seed, out, workers, no_timings: bool, json_output: bool) -> None:
    try:
        cfg = _load_experiment(config, seed, workers)
        result = runner(cfg)
        if _wants_json(out, json_output):
            text = result.to_json(include_timings=not no_timings)
        else:
            text = result.to_csv(include_timings=not no_timings)
        _emit(text, out)
        _display_sweep(result)
    except Exception as e:
        _fail(e)


@app.command(name="bench-capacity")
def bench_capacity_cmd(
    config: Path = typer.Option(..., "--config", "-c", help="Experiment config (JSON or YAML)"),
    seed: Optional[int] = typer.Option(None, "--seed", min=0, help="Override seed (beats QAM_SEED and config)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Results file (.csv or .json)"),
    workers: Optional[int] = typer.Option(None, "--workers", min=1, help="Parallel trial threads"),
    no_timings: bool = typer.Option(False, "--no-timings", help="Omit timing columns"),
    json_output: bool = typer.Option(False, "--json", help="Emit JSON instead of CSV"),
):
    """Recognition accuracy and margin as the number of stored patterns grows."""
    _sweep_command(run_capacity_sweep, config, seed, out, workers, no_timings, json_output)


@app.command(name="bench-noise")
def bench_noise_cmd(
    config: Path = typer.Option(..., "--config", "-c", help="Experiment config (JSON or YAML)"),
    seed: Optional[int] = typer.Option(None, "--seed", min=0, help="Override seed (beats QAM_SEED and config)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Results file (.csv or .json)"),
    workers: Optional[int] = typer.Option(None, "--workers", min=1, help="Parallel trial threads"),
    no_timings: bool = typer.Option(False, "--no-timings", help="Omit timing columns"),
    json_output: bool = typer.Option(False, "--json", help="Emit JSON instead of CSV"),
):
    """Recognition accuracy under phase jitter or unit re-draw noise."""
    _sweep_command(run_noise_sweep, config, seed, out, workers, no_timings, json_output)


@app.command(name="check-equivalence")
def check_equivalence_cmd(
    config: Path = typer.Option(..., "--config", "-c", help="Experiment config (JSON or YAML)"),
    seed: Optional[int] = typer.Option(None, "--seed", min=0, help="Override seed (beats QAM_SEED and config)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Report file (JSON)"),
    workers: Optional[int] = typer.Option(None, "--workers", min=1, help="Parallel trial threads"),
    json_output: bool = typer.Option(True, "--json/--no-json", help="Emit the JSON report (default)"),
):
    """Compare amplitude and phase models on bipolar and general corpora."""
    try:
        cfg = _load_experiment(config, seed, workers)
        report = run_equivalence_check(cfg)
        if json_output or out is not None:
            _emit(report.to_json(), out)

        if report.agreement_rate is not None:
            console.print(
                f"[dim]General data: winners agree in {report.general_agreements}/{report.general_cases} "
                f"trials ({report.agreement_rate:.3f})[/dim]"
            )
    except Exception as e:
        _fail(e)

    if not report.bipolar_passed:
        _fail(
            f"bipolar equivalence failed: {report.bipolar_identical}/{report.bipolar_cases} cases identical",
            EXIT_DATA,
        )
    console.print(f"[green]✓ Bipolar equivalence: {report.bipolar_identical}/{report.bipolar_cases} identical[/green]")


@app.command(name="bench-timing")
def bench_timing_cmd(
    config: Path = typer.Option(..., "--config", "-c", help="Experiment config (JSON or YAML)"),
    seed: Optional[int] = typer.Option(None, "--seed", min=0, help="Override seed (beats QAM_SEED and config)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Results file (.csv or .json)"),
    workers: Optional[int] = typer.Option(None, "--workers", min=1, help="Parallel trial threads"),
    no_timings: bool = typer.Option(False, "--no-timings", help="Omit timing columns"),
    json_output: bool = typer.Option(False, "--json", help="Emit JSON instead of CSV"),
):
    """Median wall time and memory footprint of dense versus lazy recall."""
    try:
        cfg = _load_experiment(config, seed, workers)
        report = run_timing(cfg)
        if _wants_json(out, json_output):
            text = report.to_json(include_timings=not no_timings)
        else:
            text = report.to_csv(include_timings=not no_timings)
        _emit(text, out)

        table = Table(title="dense vs lazy recall")
        for column in ("N", "P", "dense ns", "lazy ns", "dense numbers", "lazy numbers", "max disagreement"):
            table.add_column(column, justify="right")
        for row in report.rows:
            table.add_row(
                str(row.N),
                str(row.P),
                str(row.median_dense_ns),
                str(row.median_lazy_ns),
                str(row.dense_numbers),
                str(row.lazy_numbers),
                f"{row.max_disagreement:.2e}",
            )
        console.print(table)
    except Exception as e:
        _fail(e)


@app.command()
def info(
    memory: Path = typer.Option(..., "--memory", "-m", help="Memory file"),
    json_output: bool = typer.Option(False, "--json", help="Emit JSON"),
):
    """Show size, trace and Hermiticity residual of a memory file."""
    try:
        hologram = load(memory)
    except Exception as e:
        _fail(e)

    result = validate_hologram(hologram)
    try:
        couplings = integer_couplings(hologram)
        bipolar = True
        coupling_range = [int(couplings.min()), int(couplings.max())]
    except HologramError:
        bipolar = False
        coupling_range = None

    summary = {
        "memory": str(memory),
        "N": hologram.dimension,
        "P": hologram.pattern_count,
        "trace": hologram.trace(),
        "hermitian_residual": hologram.hermitian_residual(),
        "labels": list(hologram.labels),
        "bipolar_couplings": bipolar,
        "integer_coupling_range": coupling_range,
        "validation": result.to_dict(),
    }

    if json_output:
        typer.echo(json.dumps(summary, indent=2))
        return

    table = Table(title=escape(str(memory)), show_header=False)
    table.add_column("field")
    table.add_column("value", justify="right")
    table.add_row("N", str(hologram.dimension))
    table.add_row("P", str(hologram.pattern_count))
    table.add_row("trace", f"{hologram.trace():.12g}")
    table.add_row("Hermiticity residual", f"{hologram.hermitian_residual():.3e}")
    table.add_row("bipolar couplings", "yes" if bipolar else "no")
    stdout_console.print(table)
    _display_validation_result(result)


def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        app(args=argv, prog_name="qamnet", standalone_mode=False)
    except UsageError as e:
        console.print(f"[red]Error:[/red] {escape(_one_line(e.format_message()))}")
        return EXIT_USAGE
    except Abort:
        return EXIT_USAGE
    except SystemExit as e:
        if e.code is None:
            return EXIT_OK
        return e.code if isinstance(e.code, int) else EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
