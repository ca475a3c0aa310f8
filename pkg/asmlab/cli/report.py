"""Regime comparison command."""

from pathlib import Path
from typing import Optional

import typer

from asmlab.cli.main import (
    ConfigOption,
    ForceOption,
    OutOption,
    handle_error,
    prepare_out_dir,
    resolve_config,
)
from asmlab.cli.output import console, print_success, print_table, print_warning
from asmlab.cli.runconfig import load_run_config
from asmlab.exceptions import AsmLabError
from asmlab.logging_config import get_logger
from asmlab.metrics.report import read_report_csv
from asmlab.reporting.compare import NOT_AVAILABLE, build_comparison, write_deltas
from asmlab.reporting.svg import write_charts

logger = get_logger(__name__)


def report(
    reports: list[Path] = typer.Argument(
        ..., help="Evaluation directories (or metrics.csv files), at least two"
    ),
    candidate: Optional[str] = typer.Option(
        None, "--candidate", help="Label compared against the others (default: asm)"
    ),
    family: Optional[list[str]] = typer.Option(
        None, "--family", help="Per-class metric family to chart (repeatable; default all)"
    ),
    config: ConfigOption = None,
    out: OutOption = None,
    force: ForceOption = False,
) -> None:
    """
    Compare evaluated regimes on one frozen validation set.

    Writes deltas.csv (candidate minus each baseline, per metric and per class)
    and one SVG bar chart of per-class improvements per baseline and family.
    Classes missing from one side are reported as n/a.
    """
    try:
        run = load_run_config(
            resolve_config(config),
            {
                "report.candidate": candidate,
                "report.families": ",".join(family) if family else None,
            },
        )
        loaded = [read_report_csv(path) for path in reports]
        comparison = build_comparison(loaded, run.report.candidate)
        out_dir = prepare_out_dir(out, f"report-{comparison.candidate}", force)
        deltas_path = write_deltas(comparison, out_dir)
        families = list(run.report.families) if run.report.families else None
        charts = write_charts(comparison, out_dir, families)

        for pair in comparison.pairs:
            rows = [
                {
                    "metric": d.metric,
                    "baseline": NOT_AVAILABLE if d.baseline is None else d.baseline,
                    "candidate": NOT_AVAILABLE if d.candidate is None else d.candidate,
                    "delta": NOT_AVAILABLE if d.delta is None else d.delta,
                }
                for d in pair.scalars
            ]
            print_table(rows, title=f"{pair.candidate} vs {pair.baseline}")
            if pair.unavailable:
                print_warning(f"{len(pair.unavailable)} rows without a delta (n/a)")
        print_success(f"Wrote {len(charts)} charts")
        console.print(f"deltas: {deltas_path}", soft_wrap=True)
    except AsmLabError as e:
        handle_error(e)
