"""Instance-wise aggregation: every object counts once, whatever its area."""

from collections.abc import Callable, Iterable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from asmlab.exceptions import DataError

RegionMetric = Callable[[NDArray, NDArray, NDArray[np.bool_]], float]


@dataclass
class InstanceSample:
    """Prediction and ground truth of one image plus its instance and class masks (H x W)."""

    pred: NDArray
    gt: NDArray
    instances: NDArray[np.integer]
    classes: NDArray[np.integer]


@dataclass
class InstanceAggregate:
    values: dict[int, float] = field(default_factory=dict)
    counts: dict[int, int] = field(default_factory=dict)
    missing: list[int] = field(default_factory=list)


def instance_regions(
    instances: NDArray[np.integer], classes: NDArray[np.integer]
) -> list[tuple[int, int, NDArray[np.bool_]]]:
    """(instance id, class id, region) for every nonzero instance, in id order.

    Raises:
        DataError: If an instance covers pixels of more than one class
    """
    inst, cls = np.asarray(instances), np.asarray(classes)
    if inst.shape != cls.shape:
        raise DataError("Instance and class masks differ in shape", inst=inst.shape, cls=cls.shape)
    regions = []
    for instance_id in np.unique(inst):
        if instance_id == 0:
            continue
        region = inst == instance_id
        labels = np.unique(cls[region])
        if labels.size != 1:
            raise DataError(
                f"Instance {int(instance_id)} spans several classes",
                instance=int(instance_id),
                classes=labels.tolist(),
            )
        regions.append((int(instance_id), int(labels[0]), region))
    return regions


def instance_aggregate(
    metric_fn: RegionMetric,
    samples: Iterable[InstanceSample],
    classes: int | None = None,
) -> InstanceAggregate:
    """Evaluate metric_fn(pred, gt, region) per instance, then average per class.

    The class value is the unweighted mean over its instances. With classes given,
    foreground classes 1..classes-1 that have no instance are listed in missing.
    """
    per_class: dict[int, list[float]] = {}
    for sample in samples:
        for _, class_id, region in instance_regions(sample.instances, sample.classes):
            value = float(metric_fn(sample.pred, sample.gt, region))
            per_class.setdefault(class_id, []).append(value)

    result = InstanceAggregate()
    for class_id in sorted(per_class):
        values = per_class[class_id]
        result.values[class_id] = float(np.mean(values))
        result.counts[class_id] = len(values)
    if classes is not None:
        result.missing = [c for c in range(1, classes) if c not in per_class]
    return result


def region_accuracy(pred: NDArray, gt: NDArray, region: NDArray[np.bool_]) -> float:
    """Fraction of region pixels labelled correctly."""
    return float(np.mean(pred[region] == gt[region]))
