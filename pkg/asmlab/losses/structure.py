"""Multi-layer structure matching loss and loss-map export."""

from collections.abc import Mapping
from pathlib import Path

import numpy as np

from asmlab.data.imageio import write_pfm
from asmlab.engine import ops
from asmlab.engine.tensor import Tensor
from asmlab.exceptions import FileError, UsageError
from asmlab.logging_config import get_logger
from asmlab.losses.result import LossValue

logger = get_logger(__name__)


def asm_loss(taps_pred: Mapping[str, Tensor], taps_gt: Mapping[str, Tensor]) -> LossValue:
    """½ · mean over all tap elements of (A(S(x)) - A(y))².

    Every element of every tap carries the same weight, so adding a tap never
    rescales the contribution of the others. The per-tap maps are the
    channel-summed squared differences at each pixel.

    Raises:
        UsageError: If the tap maps differ in keys or shapes
    """
    if set(taps_pred) != set(taps_gt):
        raise UsageError(
            "Tap maps have different layers",
            pred=sorted(taps_pred),
            gt=sorted(taps_gt),
        )
    if not taps_pred:
        raise UsageError("asm_loss needs at least one tap")

    total: Tensor | None = None
    count = 0
    maps = {}
    for layer in taps_pred:
        pred, gt = taps_pred[layer], taps_gt[layer]
        if pred.shape != gt.shape:
            raise UsageError(
                f"Tap {layer} shapes differ", layer=layer, pred=pred.shape, gt=gt.shape
            )
        sq = ops.square(ops.sub(pred, gt))
        part = ops.sum(sq)
        total = part if total is None else ops.add(total, part)
        count += pred.size
        maps[layer] = sq.values.sum(axis=1) if sq.values.ndim == 4 else sq.values.copy()

    assert total is not None
    return LossValue(ops.scale(total, 0.5 / count), maps)


def export_loss_maps(loss: LossValue, out_dir: Path, sample: int = 0) -> list[Path]:
    """Write one PFM float map per tap, named <layer>.pfm.

    Raises:
        UsageError: If the loss carries no maps or sample is out of range
        FileError: If a map cannot be written
    """
    if not loss.maps:
        raise UsageError("Loss carries no per-layer maps")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise FileError(str(out_dir), "mkdir", str(e)) from e

    written = []
    for layer, batch_map in loss.maps.items():
        if not 0 <= sample < batch_map.shape[0]:
            raise UsageError("sample index out of range", sample=sample, batch=batch_map.shape[0])
        path = out_dir / f"{layer}.pfm"
        write_pfm(path, np.asarray(batch_map[sample], dtype=np.float64))
        written.append(path)
    logger.debug("loss_maps_exported", out_dir=str(out_dir), layers=loss.layers)
    return written
