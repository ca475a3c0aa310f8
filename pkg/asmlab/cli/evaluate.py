"""Evaluation command."""

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
    settings,
)
from asmlab.cli.output import console, print_dict, print_success
from asmlab.cli.runconfig import RUN_CONFIG_NAME, load_run_config
from asmlab.data.manifest import (
    DatasetManifest,
    load_samples,
    manifest_checksum,
    read_manifest,
    read_split,
)
from asmlab.exceptions import AsmLabError, ConfigurationError, DataError, UsageError
from asmlab.logging_config import get_logger
from asmlab.metrics.evaluate import evaluate_predictions, predict_dataset, targets_as_predictions
from asmlab.metrics.report import write_report
from asmlab.nets.checkpoint import load_network
from asmlab.nets.network import Network
from asmlab.training.loop import resolve_checkpoint
from asmlab.training.players import network_task

logger = get_logger(__name__)

GROUND_TRUTH_LABEL = "ground-truth"


def run_label(checkpoint: Path) -> str:
    """Regime recorded in the run.cfg next to (or above) a checkpoint, else a path name."""
    for directory in list(checkpoint.parents)[:3]:
        cfg = directory / RUN_CONFIG_NAME
        if cfg.is_file():
            return load_run_config(cfg).train.regime
    return checkpoint.parent.name


def check_task(net: Network, manifest: DatasetManifest) -> None:
    """Reject a checkpoint built for another task than the dataset's.

    Raises:
        ConfigurationError: On a task mismatch
    """
    task = network_task(net)
    if task is not None and task != manifest.task:
        raise ConfigurationError(
            f"Checkpoint was trained for {task} but the dataset is {manifest.task}",
            checkpoint_task=task,
            dataset_task=manifest.task,
        )


def evaluate(
    data: Path = typer.Option(..., "--data", "-d", help="Dataset directory or manifest file"),
    checkpoint: Optional[Path] = typer.Option(
        None, "--checkpoint", "-k", help="Predictor checkpoint, iteration or run directory"
    ),
    ground_truth: bool = typer.Option(
        False, "--ground-truth", help="Score the targets themselves (sanity check)"
    ),
    split: Optional[str] = typer.Option(None, "--split", "-s", help="train | val | all"),
    label: Optional[str] = typer.Option(None, "--label", "-l", help="Report label"),
    tolerance: Optional[float] = typer.Option(
        None, "--tolerance", help="Boundary match tolerance in pixels"
    ),
    config: ConfigOption = None,
    out: OutOption = None,
    force: ForceOption = False,
) -> None:
    """
    Evaluate predictions on a dataset split and write metrics.csv and summary.jsonl.

    Reports are deterministic: repeated evaluations are byte-identical.
    """
    try:
        run = load_run_config(
            resolve_config(config),
            {"eval.split": split, "eval.label": label, "eval.tolerance_px": tolerance},
        )
        params = run.eval
        manifest = read_manifest(data)

        predictor: Network | None = None
        if ground_truth:
            name = params.label or GROUND_TRUTH_LABEL
        elif checkpoint is None:
            raise UsageError("eval needs --checkpoint or --ground-truth")
        else:
            path = resolve_checkpoint(checkpoint)
            predictor = load_network(path)
            check_task(predictor, manifest)
            name = params.label or run_label(path)

        ids = read_split(manifest, params.split)
        if not ids:
            raise DataError(f"Split {params.split} is empty", split=params.split)
        batch = load_samples(manifest, ids)
        if predictor is None:
            predictions = targets_as_predictions(manifest.task, batch)
        else:
            predictions = predict_dataset(predictor, manifest.task, batch.images)

        out_dir = prepare_out_dir(out, f"eval-{name}", force)
        report = evaluate_predictions(
            manifest.task,
            predictions,
            batch,
            manifest.classes,
            label=name,
            manifest_checksum=manifest_checksum(manifest),
            threads=settings().threads,
            tolerance_px=params.tolerance_px,
        )
        csv_path, _ = write_report(report, out_dir)

        print_success(f"Evaluated {report.samples} {params.split} samples as {name!r}")
        print_dict(report.scalars, title="Metrics")
        if report.flags:
            console.print(f"flags: {', '.join(report.flags)}", soft_wrap=True)
        console.print(f"report: {csv_path}", soft_wrap=True)
    except AsmLabError as e:
        handle_error(e)
