"""Surface-normal angular error metrics."""

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from asmlab.exceptions import DataError

ANGLE_THRESHOLDS: tuple[float, ...] = (2.82, 5.63, 11.25, 22.5, 30.0)
NORMAL_EPS = 1e-8


@dataclass
class NormalMetrics:
    mean: float
    median: float
    within: dict[float, float] = field(default_factory=dict)
    pixels: int = 0

    def as_dict(self) -> dict[str, float]:
        out = {"mean_angle": self.mean, "median_angle": self.median}
        for thr in ANGLE_THRESHOLDS:
            out[f"within_{thr:g}"] = self.within[thr]
        return out


def angular_errors(
    pred: NDArray[np.floating],
    gt: NDArray[np.floating],
    valid: NDArray[np.bool_] | None = None,
) -> NDArray[np.float64]:
    """Per-pixel angle in degrees between normalized pred and gt (channel axis -3).

    Raises:
        DataError: On shape mismatch or a channel axis other than 3
    """
    p, g = np.asarray(pred, dtype=np.float64), np.asarray(gt, dtype=np.float64)
    if p.shape != g.shape or p.ndim < 3 or p.shape[-3] != 3:
        raise DataError("Normal maps must share a ... x 3 x H x W shape", pred=p.shape, gt=g.shape)
    p = p / np.maximum(np.linalg.norm(p, axis=-3, keepdims=True), NORMAL_EPS)
    g = g / np.maximum(np.linalg.norm(g, axis=-3, keepdims=True), NORMAL_EPS)
    cos = np.clip((p * g).sum(axis=-3), -1.0, 1.0)
    angles = np.degrees(np.arccos(cos))
    if valid is not None:
        return angles[np.asarray(valid, dtype=bool)]
    return angles.ravel()


def lower_median(values: NDArray[np.float64]) -> float:
    """Median with the lower-midpoint convention for even counts."""
    ordered = np.sort(values)
    return float(ordered[(ordered.size - 1) // 2])


def normal_metrics_from_angles(angles: NDArray[np.float64]) -> NormalMetrics:
    if angles.size == 0:
        raise DataError("No valid normal pixels")
    return NormalMetrics(
        mean=float(angles.mean()),
        median=lower_median(angles),
        within={thr: float(np.mean(angles < thr)) for thr in ANGLE_THRESHOLDS},
        pixels=int(angles.size),
    )


def normal_metrics(
    pred: NDArray[np.floating],
    gt: NDArray[np.floating],
    valid: NDArray[np.bool_] | None = None,
) -> NormalMetrics:
    """Mean and median angular error (degrees) and fractions within each threshold."""
    return normal_metrics_from_angles(angular_errors(pred, gt, valid))
