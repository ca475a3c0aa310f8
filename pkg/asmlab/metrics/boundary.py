"""Per-class boundary precision / recall / F with optimal one-to-one matching."""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from asmlab.exceptions import DataError

TOLERANCE_FRACTION = 0.0075


@dataclass
class BoundaryScore:
    matched_pred: int
    matched_gt: int
    n_pred: int
    n_gt: int

    @property
    def precision(self) -> float:
        return self.matched_pred / self.n_pred if self.n_pred else 0.0

    @property
    def recall(self) -> float:
        return self.matched_gt / self.n_gt if self.n_gt else 0.0

    @property
    def f_measure(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0

    def __add__(self, other: "BoundaryScore") -> "BoundaryScore":
        return BoundaryScore(
            self.matched_pred + other.matched_pred,
            self.matched_gt + other.matched_gt,
            self.n_pred + other.n_pred,
            self.n_gt + other.n_gt,
        )


def default_tolerance(shape: tuple[int, ...]) -> float:
    """0.0075 x image diagonal."""
    h, w = shape[-2:]
    return TOLERANCE_FRACTION * float(np.hypot(h, w))


def boundary_map(mask: NDArray[np.integer]) -> NDArray[np.bool_]:
    """Pixels with a 4-neighbour of a different label (image borders are not transitions)."""
    m = np.asarray(mask)
    edge = np.zeros(m.shape, dtype=bool)
    vertical = m[1:, :] != m[:-1, :]
    horizontal = m[:, 1:] != m[:, :-1]
    edge[1:, :] |= vertical
    edge[:-1, :] |= vertical
    edge[:, 1:] |= horizontal
    edge[:, :-1] |= horizontal
    return edge


def class_boundary(mask: NDArray[np.integer], class_id: int) -> NDArray[np.int64]:
    """(row, col) coordinates of boundary pixels labelled class_id."""
    m = np.asarray(mask)
    return np.argwhere(boundary_map(m) & (m == class_id)).astype(np.int64)


def match_count(pred_pts: NDArray[np.int64], gt_pts: NDArray[np.int64], tolerance: float) -> int:
    """Size of a maximum one-to-one matching between points within tolerance.

    A min-cost assignment with cost 0 inside tolerance and 1 outside maximizes the
    number of zero-cost pairs.
    """
    if len(pred_pts) == 0 or len(gt_pts) == 0:
        return 0
    within = cdist(pred_pts, gt_pts) <= tolerance
    if not within.any():
        return 0
    rows, cols = linear_sum_assignment((~within).astype(np.float64))
    return int(within[rows, cols].sum())


def boundary_score(
    pred: NDArray[np.integer], gt: NDArray[np.integer], class_id: int, tolerance: float
) -> BoundaryScore:
    pred_pts = class_boundary(pred, class_id)
    gt_pts = class_boundary(gt, class_id)
    matched = match_count(pred_pts, gt_pts, tolerance)
    return BoundaryScore(matched, matched, len(pred_pts), len(gt_pts))


def boundary_prf(
    pred: NDArray[np.integer],
    gt: NDArray[np.integer],
    tolerance_px: float | None = None,
    classes: int | None = None,
) -> dict[int, BoundaryScore]:
    """Boundary scores for every class with a boundary in pred or gt.

    Use BoundaryScore.precision / recall / f_measure; summing scores pools the
    matched counts across classes or images.

    Raises:
        DataError: On shape mismatch or negative tolerance
    """
    pred, gt = np.asarray(pred), np.asarray(gt)
    if pred.shape != gt.shape:
        raise DataError("Boundary masks differ in shape", pred=pred.shape, gt=gt.shape)
    tolerance = default_tolerance(gt.shape) if tolerance_px is None else tolerance_px
    if tolerance < 0:
        raise DataError("tolerance must be >= 0", tolerance=tolerance)
    ids = range(classes) if classes is not None else np.union1d(pred, gt).tolist()
    scores: dict[int, BoundaryScore] = {}
    for c in ids:
        score = boundary_score(pred, gt, int(c), tolerance)
        if score.n_pred or score.n_gt:
            scores[int(c)] = score
    return scores
