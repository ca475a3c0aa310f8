"""Confusion-matrix based segmentation metrics."""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from asmlab.exceptions import DataError

IntArray = NDArray[np.int64]


def _check_ids(name: str, mask: NDArray[np.integer], classes: int) -> None:
    if mask.size and (mask.min() < 0 or mask.max() >= classes):
        raise DataError(
            f"{name} has class ids outside [0, {classes})",
            classes=classes,
            low=int(mask.min()),
            high=int(mask.max()),
        )


def confusion_matrix(
    pred: NDArray[np.integer], gt: NDArray[np.integer], classes: int
) -> IntArray:
    """C x C counts; rows are ground truth, columns predictions.

    Raises:
        DataError: On shape mismatch or ids out of range
    """
    pred, gt = np.asarray(pred), np.asarray(gt)
    if pred.shape != gt.shape:
        raise DataError(
            "Prediction and ground truth differ in shape", pred=pred.shape, gt=gt.shape
        )
    _check_ids("prediction", pred, classes)
    _check_ids("ground truth", gt, classes)
    flat = classes * gt.astype(np.int64).ravel() + pred.astype(np.int64).ravel()
    return np.bincount(flat, minlength=classes * classes).reshape(classes, classes)


def iou_from_confusion(confusion: IntArray) -> NDArray[np.float64]:
    """Per-class TP / (TP + FP + FN); NaN for classes absent from both pred and gt."""
    tp = np.diag(confusion).astype(np.float64)
    union = confusion.sum(axis=0) + confusion.sum(axis=1) - tp
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(union > 0, tp / np.where(union > 0, union, 1), np.nan)


def miou_from_confusion(confusion: IntArray) -> float:
    iou = iou_from_confusion(confusion)
    present = ~np.isnan(iou)
    return float(iou[present].mean()) if present.any() else float("nan")


@dataclass
class SegmentationMetrics:
    confusion: IntArray
    iou: NDArray[np.float64]
    miou: float
    pixel_accuracy: float
    class_accuracy: NDArray[np.float64]


def seg_metrics(
    pred: NDArray[np.integer], gt: NDArray[np.integer], classes: int
) -> SegmentationMetrics:
    """Confusion matrix, per-class IoU and mIoU (plus pixel accuracies).

    Classes absent from both prediction and ground truth are excluded from mIoU.
    """
    confusion = confusion_matrix(pred, gt, classes)
    return metrics_from_confusion(confusion)


def metrics_from_confusion(confusion: IntArray) -> SegmentationMetrics:
    iou = iou_from_confusion(confusion)
    miou = miou_from_confusion(confusion)
    total = confusion.sum()
    rows = confusion.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        class_acc = np.where(rows > 0, np.diag(confusion) / np.where(rows > 0, rows, 1), np.nan)
    return SegmentationMetrics(
        confusion=confusion,
        iou=iou,
        miou=miou,
        pixel_accuracy=float(np.trace(confusion) / total) if total else float("nan"),
        class_accuracy=class_acc,
    )


def background_confusion(confusion: IntArray) -> tuple[dict[int, float], list[int]]:
    """Fraction of each non-background class's pixels predicted as class 0.

    Returns:
        (fractions by class, classes omitted because their row is empty)
    """
    fractions: dict[int, float] = {}
    empty: list[int] = []
    for c in range(1, confusion.shape[0]):
        row = int(confusion[c].sum())
        if row == 0:
            empty.append(c)
            continue
        fractions[c] = float(confusion[c, 0] / row)
    return fractions, empty
