"""Full-dataset evaluation: per-sample metric work fanned out, merged in sample order."""

from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from numpy.typing import NDArray

from asmlab.data.manifest import Batch
from asmlab.data.scenes import SURFACE_CLASSES, instance_class
from asmlab.engine.tensor import Tensor
from asmlab.exceptions import DataError, UsageError
from asmlab.logging_config import get_logger
from asmlab.metrics.boundary import BoundaryScore, boundary_prf
from asmlab.metrics.depth import DepthMetrics, depth_metrics_from_pairs, valid_pairs
from asmlab.metrics.instances import InstanceSample, instance_aggregate, region_accuracy
from asmlab.metrics.normals import NormalMetrics, angular_errors, normal_metrics_from_angles
from asmlab.metrics.report import MetricsReport
from asmlab.metrics.segmentation import (
    background_confusion,
    confusion_matrix,
    metrics_from_confusion,
)
from asmlab.nets.network import Network, forward_with_taps
from asmlab.tasks import TaskKind, head_name, role_kind, target_roles

logger = get_logger(__name__)

DEPTH_FLOOR = 1e-3
PREDICT_CHUNK = 16
INSTANCE_DELTA = 1.25
INSTANCE_ANGLE = 11.25

_surface_class = np.vectorize(instance_class, otypes=[np.int64])


@dataclass
class SamplePartial:
    """Per-sample contributions, reduced in sample order."""

    confusion: NDArray[np.int64] | None = None
    boundary: dict[int, BoundaryScore] = field(default_factory=dict)
    depth_pred: NDArray[np.float64] | None = None
    depth_gt: NDArray[np.float64] | None = None
    angles: NDArray[np.float64] | None = None


def predict_dataset(
    predictor: Network, task: TaskKind, images: NDArray[np.float64]
) -> dict[str, NDArray]:
    """Run the predictor without a tape and decode its heads per role.

    Segmentation logits become argmax class masks; depth is clamped to DEPTH_FLOOR
    so the ratio metrics stay defined; normals are returned raw.
    """
    outputs: dict[str, list[NDArray]] = {role: [] for role in target_roles(task)}
    for start in range(0, images.shape[0], PREDICT_CHUNK):
        heads, _ = forward_with_taps(predictor, Tensor(images[start : start + PREDICT_CHUNK]))
        for role in outputs:
            values = heads[head_name(role)].values
            match role_kind(task, role):
                case "segmentation":
                    outputs[role].append(np.argmax(values, axis=1))
                case "depth":
                    outputs[role].append(np.maximum(values, DEPTH_FLOOR))
                case "normal":
                    outputs[role].append(values)
    return {
        role: np.concatenate(chunks, axis=0) if chunks else np.zeros((0,))
        for role, chunks in outputs.items()
    }


def _sample_partial(
    kind: str, pred: NDArray, gt: NDArray, classes: int, tolerance: float | None
) -> SamplePartial:
    match kind:
        case "segmentation":
            return SamplePartial(
                confusion=confusion_matrix(pred, gt, classes),
                boundary=boundary_prf(pred, gt, tolerance, classes=classes),
            )
        case "depth":
            p, g = valid_pairs(pred, gt)
            return SamplePartial(depth_pred=p, depth_gt=g)
        case "normal":
            return SamplePartial(angles=angular_errors(pred, gt))
    raise UsageError(f"Unknown target kind: {kind}")


def _merge_boundary(partials: list[SamplePartial]) -> dict[int, BoundaryScore]:
    merged: dict[int, BoundaryScore] = {}
    for part in partials:
        for class_id, score in part.boundary.items():
            merged[class_id] = merged[class_id] + score if class_id in merged else score
    return dict(sorted(merged.items()))


def _segmentation_block(
    report: MetricsReport,
    partials: list[SamplePartial],
    pred: NDArray,
    gt: NDArray,
    instances: NDArray,
    classes: int,
) -> None:
    confusion = reduce(np.add, [p.confusion for p in partials if p.confusion is not None])
    seg = metrics_from_confusion(confusion)
    report.confusion = confusion.tolist()
    report.scalars["miou"] = seg.miou
    report.scalars["pixel_accuracy"] = seg.pixel_accuracy
    report.per_class["iou"] = {c: float(v) for c, v in enumerate(seg.iou) if not np.isnan(v)}
    report.per_class["class_accuracy"] = {
        c: float(v) for c, v in enumerate(seg.class_accuracy) if not np.isnan(v)
    }
    report.flags.extend(f"iou_absent:{c}" for c, v in enumerate(seg.iou) if np.isnan(v))

    boundary = _merge_boundary(partials)
    overall = reduce(lambda a, b: a + b, boundary.values(), BoundaryScore(0, 0, 0, 0))
    report.scalars["boundary_precision"] = overall.precision
    report.scalars["boundary_recall"] = overall.recall
    report.scalars["boundary_f"] = overall.f_measure
    report.per_class["boundary_precision"] = {c: s.precision for c, s in boundary.items()}
    report.per_class["boundary_recall"] = {c: s.recall for c, s in boundary.items()}
    report.per_class["boundary_f"] = {c: s.f_measure for c, s in boundary.items()}

    fractions, empty = background_confusion(confusion)
    report.per_class["background_confusion"] = fractions
    report.flags.extend(f"background_confusion_empty:{c}" for c in empty)

    agg = instance_aggregate(
        region_accuracy,
        (InstanceSample(pred[i], gt[i], instances[i], gt[i]) for i in range(len(gt))),
        classes=classes,
    )
    report.per_class["instance_accuracy"] = agg.values
    report.flags.extend(f"instance_missing:{c}" for c in agg.missing)


def _delta_accuracy(pred: NDArray, gt: NDArray, region: NDArray[np.bool_]) -> float:
    p, g = pred[0][region], gt[0][region]
    return float(np.mean(np.maximum(g / p, p / g) < INSTANCE_DELTA))


def _angle_within(pred: NDArray, gt: NDArray, region: NDArray[np.bool_]) -> float:
    return float(np.mean(angular_errors(pred, gt, region) < INSTANCE_ANGLE))


def _regression_block(
    report: MetricsReport,
    kind: str,
    prefix: str,
    partials: list[SamplePartial],
    pred: NDArray,
    gt: NDArray,
    instances: NDArray,
) -> None:
    metric: DepthMetrics | NormalMetrics
    if kind == "depth":
        metric = depth_metrics_from_pairs(
            np.concatenate([p.depth_pred for p in partials if p.depth_pred is not None]),
            np.concatenate([p.depth_gt for p in partials if p.depth_gt is not None]),
        )
        family, region_fn = "instance_delta_1.25", _delta_accuracy
    else:
        metric = normal_metrics_from_angles(
            np.concatenate([p.angles for p in partials if p.angles is not None])
        )
        family, region_fn = "instance_within_11.25", _angle_within
    for name, value in metric.as_dict().items():
        report.scalars[prefix + name] = value

    agg = instance_aggregate(
        region_fn,
        (
            InstanceSample(pred[i], gt[i], instances[i], _surface_class(instances[i]))
            for i in range(len(gt))
        ),
        classes=SURFACE_CLASSES + 1,
    )
    report.per_class[prefix + family] = agg.values
    report.flags.extend(f"{prefix}instance_missing:{c}" for c in agg.missing)


def evaluate_predictions(
    task: TaskKind,
    predictions: Mapping[str, NDArray],
    batch: Batch,
    classes: int,
    label: str = "",
    manifest_checksum: str = "",
    threads: int = 1,
    tolerance_px: float | None = None,
) -> MetricsReport:
    """Score predictions for every role of task against batch.

    Segmentation predictions are N x H x W class ids, depth N x 1 x H x W and
    normals N x 3 x H x W. Per-sample work runs on up to threads workers; partial
    results are merged in sample order so the report is independent of threads.

    Raises:
        DataError: On an empty batch, missing roles or shape mismatches
    """
    if len(batch) == 0:
        raise DataError("Nothing to evaluate: the batch is empty")
    report = MetricsReport(
        task=task,
        label=label,
        manifest_checksum=manifest_checksum,
        classes=classes if task == "segmentation" else 0,
        samples=len(batch),
    )
    for role in target_roles(task):
        if role not in predictions or role not in batch.targets:
            raise DataError(f"Missing predictions or targets for role {role}", role=role)
        pred, gt = np.asarray(predictions[role]), batch.targets[role]
        if pred.shape != gt.shape:
            raise DataError(
                f"Prediction shape does not match targets for {role}",
                role=role,
                pred=pred.shape,
                gt=gt.shape,
            )
        kind = role_kind(task, role)
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            partials = list(
                pool.map(
                    lambda i: _sample_partial(kind, pred[i], gt[i], classes, tolerance_px),
                    range(len(batch)),
                )
            )
        if kind == "segmentation":
            _segmentation_block(report, partials, pred, gt, batch.instances, classes)
        else:
            prefix = f"{role}." if task == "joint" else ""
            _regression_block(report, kind, prefix, partials, pred, gt, batch.instances)

    logger.info(
        "evaluation_completed",
        task=task,
        label=label,
        samples=len(batch),
        threads=threads,
        metrics=len(report.scalars),
    )
    return report


def targets_as_predictions(task: TaskKind, batch: Batch) -> dict[str, NDArray]:
    """Ground truth in prediction layout (for sanity evaluations)."""
    return {role: batch.targets[role] for role in target_roles(task)}
