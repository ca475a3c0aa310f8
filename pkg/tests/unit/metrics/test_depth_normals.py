"""Tests for depth and surface-normal metrics."""

import numpy as np
import pytest

from asmlab.exceptions import DataError
from asmlab.metrics.depth import depth_metrics
from asmlab.metrics.normals import angular_errors, lower_median, normal_metrics


def constant_normals(vector, size=2):
    return np.broadcast_to(np.asarray(vector, float)[:, None, None], (3, size, size))


class TestDepthMetrics:
    """Tests for rel, rms, log10 and δ accuracies."""

    def test_uniform_overestimate(self):
        result = depth_metrics(np.full((4, 4), 3.0), np.full((4, 4), 2.0))
        assert result.rel == pytest.approx(0.5)
        assert result.rms == pytest.approx(1.0)
        assert result.log10 == pytest.approx(abs(np.log10(2 / 3)))
        assert result.deltas[1.25] == 0.0
        assert result.deltas[1.25**2] == 1.0
        assert result.pixels == 16

    def test_perfect_prediction(self):
        gt = np.random.default_rng(0).uniform(1.0, 5.0, (6, 6))
        result = depth_metrics(gt, gt)
        assert result.rel == result.rms == result.log10 == 0.0
        assert all(v == 1.0 for v in result.deltas.values())

    def test_valid_mask_restricts_pixels(self):
        pred = np.array([[2.0, 100.0]])
        gt = np.array([[2.0, 1.0]])
        result = depth_metrics(pred, gt, valid=np.array([[True, False]]))
        assert result.rel == 0.0
        assert result.pixels == 1

    def test_as_dict_names(self):
        names = depth_metrics(np.ones((2, 2)), np.ones((2, 2))).as_dict()
        assert list(names)[:3] == ["rel", "log10", "rms"]
        assert "delta_1.25^0.25" in names and "delta_1.25^3" in names

    def test_non_positive_depth(self):
        with pytest.raises(DataError):
            depth_metrics(np.zeros((2, 2)), np.ones((2, 2)))

    def test_no_valid_pixels(self):
        with pytest.raises(DataError):
            depth_metrics(np.ones((2, 2)), np.ones((2, 2)), valid=np.zeros((2, 2), bool))


class TestNormalMetrics:
    """Tests for angular error statistics."""

    def test_orthogonal_normals(self):
        result = normal_metrics(constant_normals([1, 0, 0]), constant_normals([0, 1, 0]))
        assert result.mean == pytest.approx(90.0)
        assert result.median == pytest.approx(90.0)
        assert all(v == 0.0 for v in result.within.values())

    def test_scale_invariant(self):
        gt = constant_normals([0, 0, 1])
        pred = constant_normals([0, 1, 1]) * 7.0
        np.testing.assert_allclose(angular_errors(pred, gt), 45.0)

    def test_identical_normals(self):
        result = normal_metrics(constant_normals([0, 0.6, 0.8]), constant_normals([0, 0.6, 0.8]))
        assert result.mean == pytest.approx(0.0, abs=1e-5)
        assert result.within[2.82] == 1.0

    def test_lower_median_even_count(self):
        assert lower_median(np.array([4.0, 1.0, 3.0, 2.0])) == 2.0

    def test_lower_median_odd_count(self):
        assert lower_median(np.array([5.0, 1.0, 3.0])) == 3.0

    def test_wrong_channel_count(self):
        with pytest.raises(DataError):
            angular_errors(np.ones((2, 4, 4)), np.ones((2, 4, 4)))
