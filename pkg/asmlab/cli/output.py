"""Console output for CLI commands: run summaries, metric tables and status lines."""

from collections.abc import Mapping, Sequence
from numbers import Number
from typing import Any

from rich.console import Console, JustifyMethod
from rich.table import Table

console = Console()
console_err = Console(stderr=True)


def set_quiet(quiet: bool) -> None:
    """Silence everything except errors."""
    console.quiet = quiet


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _is_numeric_column(rows: Sequence[Mapping[str, Any]], column: str) -> bool:
    values = [row.get(column) for row in rows]
    return all(isinstance(v, Number) and not isinstance(v, bool) for v in values)


def print_table(
    data: Sequence[Mapping[str, Any]],
    title: str | None = None,
    columns: list[str] | None = None,
) -> None:
    """Print rows as a Rich table, numeric columns right-aligned.

    Args:
        data: Rows keyed by column name
        title: Optional table title
        columns: Column order (defaults to the first row's keys)
    """
    if not data:
        console.print("[yellow]Nothing to show[/yellow]")
        return

    if columns is None:
        columns = list(data[0].keys())

    table = Table(title=title, show_header=True, header_style="bold cyan")
    for col in columns:
        justify: JustifyMethod = "right" if _is_numeric_column(data, col) else "left"
        table.add_column(col, style="white", justify=justify)

    for row in data:
        table.add_row(*[format_value(row.get(col, "")) for col in columns])

    console.print(table)


def print_dict(data: Mapping[str, Any], title: str | None = None) -> None:
    """Print a mapping as a two-column key/value table."""
    table = Table(title=title, show_header=False)
    table.add_column("Key", style="cyan", no_wrap=True)
    table.add_column("Value", style="white")

    for key, value in data.items():
        table.add_row(key, format_value(value))

    console.print(table)


def print_success(message: str) -> None:
    console.print(f"[green]✓[/green] {message}")


def print_warning(message: str) -> None:
    console.print(f"[yellow]⚠[/yellow] {message}")
