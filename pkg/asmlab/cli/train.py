"""Training command."""

from pathlib import Path
from typing import Optional

import typer

from asmlab.cli.main import (
    ConfigOption,
    ForceOption,
    OutOption,
    SeedOption,
    handle_error,
    prepare_out_dir,
    resolve_config,
    resolve_seed,
)
from asmlab.cli.output import console, print_dict, print_success
from asmlab.cli.runconfig import RUN_CONFIG_NAME, format_run_config, load_run_config
from asmlab.data.imageio import write_text
from asmlab.data.manifest import read_manifest
from asmlab.exceptions import AsmLabError
from asmlab.logging_config import get_logger
from asmlab.training.loop import run_training

logger = get_logger(__name__)


def train(
    data: Path = typer.Option(..., "--data", "-d", help="Dataset directory or manifest file"),
    regime: Optional[str] = typer.Option(
        None, "--regime", "-r", help="iid | gan | cgan | asm | iid+asm"
    ),
    max_iter: Optional[int] = typer.Option(None, "--max-iter", help="Training iterations"),
    batch_size: Optional[int] = typer.Option(None, "--batch-size", help="Samples per batch"),
    lr_s: Optional[float] = typer.Option(None, "--lr-s", help="Predictor base learning rate"),
    lr_a: Optional[float] = typer.Option(None, "--lr-a", help="Analyzer base learning rate"),
    binarize: Optional[bool] = typer.Option(
        None, "--binarize/--no-binarize", help="WTA-binarize predictions for the analyzer"
    ),
    checkpoint_every: Optional[int] = typer.Option(
        None, "--checkpoint-every", help="Checkpoint cadence in iterations (0: final only)"
    ),
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    force: ForceOption = False,
) -> None:
    """
    Train a structured predictor on the dataset's train split.

    The task defaults to the dataset's. Config violations (for example an
    analyzer learning rate above the predictor's) exit with code 2 before any
    compute; a numeric fault exits with code 3 and names the last checkpoint.
    """
    try:
        manifest = read_manifest(data)
        run = load_run_config(
            resolve_config(config),
            {
                "regime": regime,
                "max_iter": max_iter,
                "batch_size": batch_size,
                "base_lr_s": lr_s,
                "base_lr_a": lr_a,
                "binarize": binarize,
                "checkpoint_every": checkpoint_every,
                "seed": resolve_seed(seed),
            },
            defaults={"task": manifest.task},
        )
        cfg = run.train
        out_dir = prepare_out_dir(out, f"train-{cfg.regime}", force)
        write_text(out_dir / RUN_CONFIG_NAME, format_run_config(run))

        result = run_training(cfg, manifest, out_dir)

        last = result.log.records[-1] if result.log.records else None
        print_success(f"Trained {cfg.regime} on {cfg.task} for {len(result.log)} iterations")
        if last is not None:
            print_dict(
                {"loss_s": last.loss_s, "obj_a": last.obj_a, "sr": last.sr},
                title="Final losses",
            )
        console.print(f"checkpoint: {result.checkpoint}", soft_wrap=True)
    except AsmLabError as e:
        handle_error(e)
