"""Analyzer introspection and theory-probe command."""

from enum import Enum
from pathlib import Path
from typing import Optional

import typer

from asmlab.cli.evaluate import check_task
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
from asmlab.cli.output import console, print_dict, print_success, print_warning
from asmlab.cli.runconfig import load_run_config
from asmlab.data.manifest import Batch, DatasetManifest, load_samples, read_manifest, read_split
from asmlab.engine.tensor import Tensor
from asmlab.exceptions import AsmLabError, UsageError
from asmlab.logging_config import get_logger
from asmlab.losses.result import LossValue
from asmlab.losses.structure import asm_loss, export_loss_maps
from asmlab.metrics.introspection import top_stimuli, write_stimuli
from asmlab.nets.network import Network
from asmlab.training.loop import resolve_checkpoint
from asmlab.training.players import (
    Players,
    analyzer_inputs,
    load_players,
    structure_inputs,
    target_tensors,
)
from asmlab.training.probes import theory_probe, write_probe_report
from asmlab.training.steps import analyzer_taps, predict

logger = get_logger(__name__)


class Mode(str, Enum):
    loss_maps = "loss-maps"
    top_stimuli = "top-stimuli"
    theory_probe = "theory-probe"


def _load_analyzer(checkpoint: Optional[Path], manifest: DatasetManifest) -> Players:
    if checkpoint is None:
        raise UsageError("This mode needs --checkpoint pointing at an asm run")
    players = load_players(resolve_checkpoint(checkpoint, role="analyzer").parent)
    if players.analyzer is None:
        raise UsageError("Checkpoint has no structure analyzer", path=str(checkpoint))
    check_task(players.analyzer, manifest)
    return players


def _split_batch(manifest: DatasetManifest, split: str) -> Batch:
    ids = read_split(manifest, split)
    if not ids:
        raise UsageError(f"Split {split} is empty", split=split)
    return load_samples(manifest, ids)


def sample_loss_maps(
    players: Players, manifest: DatasetManifest, batch: Batch, oracle: bool
) -> LossValue:
    """ASM loss of one sample with its per-tap maps; oracle feeds the target as prediction."""
    analyzer: Network = players.analyzer  # type: ignore[assignment]
    y = target_tensors(manifest.task, batch, manifest.classes)
    if oracle:
        prediction = {role: Tensor(t.values.copy()) for role, t in y.items()}
    else:
        heads = predict(players.predictor, Tensor(batch.images))
        prediction = structure_inputs(manifest.task, heads)
    return asm_loss(analyzer_taps(analyzer, prediction), analyzer_taps(analyzer, y))


def analyze(
    mode: Mode = typer.Option(..., "--mode", "-m", help="loss-maps | top-stimuli | theory-probe"),
    checkpoint: Optional[Path] = typer.Option(
        None, "--checkpoint", "-k", help="Run or iteration directory holding analyzer.ckpt"
    ),
    data: Optional[Path] = typer.Option(None, "--data", "-d", help="Dataset directory"),
    split: str = typer.Option("val", "--split", "-s", help="train | val | all"),
    sample: int = typer.Option(0, "--sample", help="Sample index within the split (loss-maps)"),
    oracle: bool = typer.Option(False, "--oracle", help="Use the target as the prediction"),
    layer: Optional[str] = typer.Option(None, "--layer", help="Analyzer layer (top-stimuli)"),
    filter_idx: int = typer.Option(0, "--filter", help="Filter index (top-stimuli)"),
    k: int = typer.Option(10, "--k", help="Number of stimuli (top-stimuli)"),
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    force: ForceOption = False,
) -> None:
    """
    Look inside the structure analyzer or run the theory probes.

    loss-maps writes one PFM map per feature tap for one sample; top-stimuli
    writes a PGM montage and ranking CSV for one filter; theory-probe writes
    probe.csv with the divergence, equivalence, equilibrium and lr-sweep checks.
    """
    try:
        if mode is Mode.theory_probe:
            run = load_run_config(resolve_config(config), {"probe.seed": resolve_seed(seed)})
            out_dir = prepare_out_dir(out, "theory-probe", force)
            result = theory_probe(run.probe)
            path = write_probe_report(result, out_dir)
            print_dict(
                {
                    "divergence strictly increasing": result.divergence_increasing,
                    "divergence exceeds bound": result.divergence_exceeds_bound,
                    "value zero iff exact": result.equivalence_consistent,
                    "equilibrium max |value|": result.equilibrium_max_abs,
                    **{f"diverged at ratio {r.ratio:g}": r.diverged for r in result.sweep},
                },
                title="Theory probe",
            )
            console.print(f"report: {path}", soft_wrap=True)
            return

        if data is None:
            raise UsageError(f"{mode.value} needs --data")
        manifest = read_manifest(data)
        players = _load_analyzer(checkpoint, manifest)
        analyzer: Network = players.analyzer  # type: ignore[assignment]
        batch = _split_batch(manifest, split)

        if mode is Mode.loss_maps:
            if not 0 <= sample < len(batch):
                raise UsageError(
                    f"Sample index {sample} out of range for {len(batch)} samples", sample=sample
                )
            one = batch.take([sample])
            out_dir = prepare_out_dir(out, f"loss-maps-{one.ids[0]}", force)
            loss = sample_loss_maps(players, manifest, one, oracle)
            paths = export_loss_maps(loss, out_dir)
            print_success(f"Wrote {len(paths)} loss maps for sample {one.ids[0]}")
            print_dict(
                {tap: float(m.sum()) for tap, m in loss.maps.items()}, title="Per-tap map totals"
            )
            console.print(f"value: {loss.item()!r}", soft_wrap=True)
            return

        name = layer or analyzer.spec.taps[0]
        inputs = analyzer_inputs(target_tensors(manifest.task, batch, manifest.classes))
        result_stimuli = top_stimuli(analyzer, inputs, name, filter_idx, k)
        out_dir = prepare_out_dir(out, f"top-stimuli-{name}-{filter_idx}", force)
        montage_path, ranking_path = write_stimuli(result_stimuli, out_dir)
        if result_stimuli.truncated:
            print_warning(
                f"Only {len(result_stimuli.stimuli)} of {k} non-overlapping stimuli available"
            )
        ranked = len(result_stimuli.stimuli)
        print_success(f"Ranked {ranked} stimuli for filter {filter_idx} of {name}")
        console.print(f"montage: {montage_path}", soft_wrap=True)
        console.print(f"ranking: {ranking_path}", soft_wrap=True)
    except AsmLabError as e:
        handle_error(e)
