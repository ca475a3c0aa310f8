"""Monocular depth metrics: abs rel, log10, rms and δ-threshold accuracies."""

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from asmlab.exceptions import DataError

DELTA_THRESHOLDS: tuple[float, ...] = (1.25**0.25, 1.25**0.5, 1.25, 1.25**2, 1.25**3)
DELTA_NAMES: tuple[str, ...] = (
    "delta_1.25^0.25",
    "delta_1.25^0.5",
    "delta_1.25",
    "delta_1.25^2",
    "delta_1.25^3",
)


@dataclass
class DepthMetrics:
    rel: float
    log10: float
    rms: float
    deltas: dict[float, float] = field(default_factory=dict)
    pixels: int = 0

    def as_dict(self) -> dict[str, float]:
        out = {"rel": self.rel, "log10": self.log10, "rms": self.rms}
        for name, thr in zip(DELTA_NAMES, DELTA_THRESHOLDS):
            out[name] = self.deltas[thr]
        return out


def valid_pairs(
    pred: NDArray[np.floating],
    gt: NDArray[np.floating],
    valid: NDArray[np.bool_] | None = None,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Flattened (pred, gt) over valid pixels.

    Raises:
        DataError: On shape mismatch or non-positive depth on a valid pixel
    """
    p, g = np.asarray(pred, dtype=np.float64), np.asarray(gt, dtype=np.float64)
    if p.shape != g.shape:
        raise DataError("Depth maps differ in shape", pred=p.shape, gt=g.shape)
    mask = np.ones(g.shape, dtype=bool) if valid is None else np.asarray(valid, dtype=bool)
    p, g = p[mask], g[mask]
    if (g <= 0).any() or (p <= 0).any():
        raise DataError("Depth must be positive on valid pixels")
    return p, g


def depth_metrics_from_pairs(p: NDArray[np.float64], g: NDArray[np.float64]) -> DepthMetrics:
    if p.size == 0:
        raise DataError("No valid depth pixels")
    ratio = np.maximum(g / p, p / g)
    return DepthMetrics(
        rel=float(np.mean(np.abs(g - p) / g)),
        log10=float(np.sqrt(np.mean((np.log10(g) - np.log10(p)) ** 2))),
        rms=float(np.sqrt(np.mean((g - p) ** 2))),
        deltas={thr: float(np.mean(ratio < thr)) for thr in DELTA_THRESHOLDS},
        pixels=int(p.size),
    )


def depth_metrics(
    pred: NDArray[np.floating],
    gt: NDArray[np.floating],
    valid: NDArray[np.bool_] | None = None,
) -> DepthMetrics:
    """rel = mean(|gt - pred| / gt); rms; log10 as the RMS of base-10 log differences;
    δ accuracy = fraction of pixels with max(gt/pred, pred/gt) < thr."""
    return depth_metrics_from_pairs(*valid_pairs(pred, gt, valid))
