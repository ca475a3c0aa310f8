"""Tests for boundary precision / recall / F."""

from itertools import permutations

import numpy as np
import pytest

from asmlab.exceptions import DataError
from asmlab.metrics.boundary import (
    BoundaryScore,
    boundary_map,
    boundary_prf,
    default_tolerance,
    match_count,
)


def split_mask(column: int, size: int = 8) -> np.ndarray:
    """Class 0 left of column, class 1 from column on."""
    mask = np.zeros((size, size), dtype=np.int64)
    mask[:, column:] = 1
    return mask


def exhaustive_matches(pred: np.ndarray, gt: np.ndarray, tolerance: float) -> int:
    small, large = (pred, gt) if len(pred) <= len(gt) else (gt, pred)
    best = 0
    for chosen in permutations(range(len(large)), len(small)):
        hits = sum(
            np.hypot(*(small[i] - large[j])) <= tolerance for i, j in enumerate(chosen)
        )
        best = max(best, int(hits))
    return best


class TestBoundaryMap:
    """Tests for boundary pixel extraction."""

    def test_both_sides_of_a_transition(self):
        edge = boundary_map(split_mask(4))
        assert edge[:, 3].all() and edge[:, 4].all()
        assert edge.sum() == 16

    def test_uniform_mask_has_no_boundary(self):
        assert not boundary_map(np.zeros((5, 5), int)).any()


class TestBoundaryPrf:
    """Tests for per-class boundary scores."""

    def test_identical_masks(self):
        scores = boundary_prf(split_mask(4), split_mask(4), tolerance_px=0.0)
        for score in scores.values():
            assert score.precision == score.recall == score.f_measure == 1.0

    def test_one_pixel_shift_within_tolerance(self):
        scores = boundary_prf(split_mask(5), split_mask(4), tolerance_px=1.5)
        assert set(scores) == {0, 1}
        assert all(s.f_measure == 1.0 for s in scores.values())

    def test_one_pixel_shift_without_tolerance(self):
        scores = boundary_prf(split_mask(5), split_mask(4), tolerance_px=0.5)
        assert all(s.f_measure == 0.0 for s in scores.values())

    def test_missing_prediction_boundary(self):
        scores = boundary_prf(np.zeros((8, 8), int), split_mask(4), tolerance_px=1.0)
        assert scores[1].recall == 0.0
        assert scores[1].precision == 0.0

    def test_scores_pool_by_addition(self):
        total = BoundaryScore(1, 1, 2, 4) + BoundaryScore(3, 3, 2, 4)
        assert total.precision == 1.0
        assert total.recall == 0.5
        assert total.f_measure == pytest.approx(2 / 3)

    def test_default_tolerance_scales_with_diagonal(self):
        assert default_tolerance((30, 40)) == pytest.approx(0.0075 * 50)

    def test_shape_mismatch(self):
        with pytest.raises(DataError):
            boundary_prf(np.zeros((4, 4), int), np.zeros((4, 5), int))

    def test_negative_tolerance(self):
        with pytest.raises(DataError):
            boundary_prf(split_mask(4), split_mask(4), tolerance_px=-1.0)


class TestMatchCount:
    """Tests for the one-to-one matching size."""

    def test_no_double_matching(self):
        pred = np.array([[0, 0]])
        gt = np.array([[0, 0], [0, 1]])
        assert match_count(pred, gt, 2.0) == 1

    def test_empty_side(self):
        assert match_count(np.zeros((0, 2), np.int64), np.array([[1, 1]]), 5.0) == 0

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_exhaustive_search(self, seed):
        rng = np.random.default_rng(seed)
        pred = rng.integers(0, 6, (int(rng.integers(1, 7)), 2))
        gt = rng.integers(0, 6, (int(rng.integers(1, 7)), 2))
        assert match_count(pred, gt, 1.5) == exhaustive_matches(pred, gt, 1.5)
