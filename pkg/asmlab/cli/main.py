"""Main CLI entry point for asmlab."""

import sys
from pathlib import Path
from typing import Annotated, Optional

import typer

from asmlab import __version__
from asmlab.cli.output import console, console_err, set_quiet
from asmlab.config import Settings, get_settings
from asmlab.engine.tensor import set_finite_check
from asmlab.exceptions import AsmLabError, NumericError, UsageError, get_exit_code
from asmlab.logging_config import get_logger, setup_logging

app = typer.Typer(
    name="asmlab",
    help="asmlab - adversarial structure matching at desk scale",
    add_completion=False,
    rich_markup_mode="rich",
    no_args_is_help=True,
)

logger = get_logger(__name__)


class CLIState:
    """Global CLI state."""

    config: Optional[Path] = None
    seed: Optional[int] = None
    out: Optional[Path] = None
    force: bool = False
    verbose: bool = False
    quiet: bool = False
    settings: Optional[Settings] = None


state = CLIState()

ConfigOption = Annotated[
    Optional[Path],
    typer.Option(
        "--config",
        "-c",
        help="Run config file (key = value lines)",
        exists=True,
        file_okay=True,
        dir_okay=False,
        readable=True,
    ),
]
SeedOption = Annotated[Optional[int], typer.Option("--seed", help="Seed override", min=0)]
OutOption = Annotated[Optional[Path], typer.Option("--out", "-o", help="Output directory")]
ForceOption = Annotated[
    bool, typer.Option("--force", "-f", help="Write into an existing output directory")
]


def version_callback(value: bool) -> None:
    """Callback for --version flag."""
    if value:
        console.print(f"asmlab version: {__version__}")
        console.print(f"Python: {sys.version.split()[0]}")
        raise typer.Exit(0)


@app.callback()
def main(
    ctx: typer.Context,
    version: bool = typer.Option(
        False,
        "--version",
        "-V",
        help="Show version information and exit",
        callback=version_callback,
        is_eager=True,
    ),
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    force: ForceOption = False,
    settings_file: Optional[Path] = typer.Option(
        None, "--settings", help="Ambient settings YAML (default ~/.asmlab/config.yaml)"
    ),
    verbose: bool = typer.Option(
        False,
        "--verbose",
        "-v",
        help="Enable verbose logging",
    ),
    quiet: bool = typer.Option(
        False,
        "--quiet",
        "-q",
        help="Suppress non-error output",
    ),
) -> None:
    """
    asmlab - adversarial structure matching lab

    Generate synthetic datasets, train structured predictors under the iid, gan,
    cgan, asm and iid+asm regimes, evaluate them, look inside the structure
    analyzer and compare regimes.
    """
    state.config = config
    state.seed = seed
    state.out = out
    state.force = force
    state.verbose = verbose
    state.quiet = quiet

    state.settings = get_settings(settings_file, reload=settings_file is not None)
    set_quiet(quiet)
    setup_logging("DEBUG" if verbose else "ERROR" if quiet else None)
    set_finite_check(state.settings.float_check)
    ctx.obj = state


def resolve_config(config: Optional[Path]) -> Optional[Path]:
    return config if config is not None else state.config


def resolve_seed(seed: Optional[int]) -> Optional[int]:
    return seed if seed is not None else state.seed


def settings() -> Settings:
    if state.settings is None:
        state.settings = get_settings()
    return state.settings


def prepare_out_dir(out: Optional[Path], default_name: str, force: bool) -> Path:
    """The command's output directory; an existing non-empty one needs --force.

    Raises:
        UsageError: If the directory exists with content and force is not set
    """
    directory = out if out is not None else state.out
    if directory is None:
        directory = settings().default_out_dir / default_name
    if directory.exists() and any(directory.iterdir()) and not (force or state.force):
        raise UsageError(
            f"Output directory {directory} already exists; pass --force to reuse it",
            path=str(directory),
        )
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def print_failure(error: Exception) -> None:
    """Print an error for the user; context and tracebacks only in --verbose."""
    if isinstance(error, AsmLabError):
        console_err.print(f"\n[red]Error:[/red] {error.message}")
        if isinstance(error, NumericError) and error.context.get("checkpoint"):
            console_err.print(f"Last checkpoint: {error.context['checkpoint']}", soft_wrap=True)

        if state.verbose and error.context:
            console_err.print("\n[yellow]Context:[/yellow]")
            for key, value in error.context.items():
                console_err.print(f"  {key}: {value}")
    else:
        console_err.print(f"\n[red]Unexpected Error:[/red] {str(error)}")

        if state.verbose:
            import traceback

            console_err.print("\n[yellow]Traceback:[/yellow]")
            console_err.print(traceback.format_exc())


def handle_error(error: Exception) -> None:
    """Print the error and exit with its stable exit code.

    Args:
        error: Exception to handle
    """
    print_failure(error)
    raise typer.Exit(get_exit_code(error))


from asmlab.cli import analyze, evaluate, gen_data, report, train  # noqa: E402

app.command(name="gen-data", help="Generate a synthetic dataset")(gen_data.gen_data)
app.command(name="train", help="Train a structured predictor")(train.train)
app.command(name="eval", help="Evaluate a checkpoint on a dataset split")(evaluate.evaluate)
app.command(name="analyze", help="Inspect the structure analyzer")(analyze.analyze)
app.command(name="report", help="Compare evaluated regimes")(report.report)


def main_cli() -> None:
    """Entry point for CLI application with error handling."""
    try:
        app()
    except KeyboardInterrupt:
        console.print("\n[yellow]Operation cancelled by user[/yellow]")
        sys.exit(1)
    except Exception as e:
        print_failure(e)
        sys.exit(get_exit_code(e))


if __name__ == "__main__":
    main_cli()
