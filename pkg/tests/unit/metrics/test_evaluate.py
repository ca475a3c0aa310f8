"""Tests for full-dataset evaluation."""

import numpy as np
import pytest

from asmlab.exceptions import DataError
from asmlab.metrics.evaluate import evaluate_predictions, targets_as_predictions


class TestSegmentationEvaluation:
    """Tests for segmentation reports."""

    def test_ground_truth_is_perfect(self, seg_batch):
        manifest, batch = seg_batch
        report = evaluate_predictions(
            "segmentation", targets_as_predictions("segmentation", batch), batch, 3
        )
        assert report.scalars["miou"] == 1.0
        assert report.scalars["pixel_accuracy"] == 1.0
        assert report.scalars["boundary_f"] == 1.0
        assert all(v == 0.0 for v in report.per_class["background_confusion"].values())
        assert all(v == 1.0 for v in report.per_class["instance_accuracy"].values())
        assert report.samples == len(batch)

    def test_all_background_prediction(self, seg_batch):
        _, batch = seg_batch
        predictions = {"target": np.zeros_like(batch.targets["target"])}
        report = evaluate_predictions("segmentation", predictions, batch, 3)
        assert report.scalars["miou"] < 1.0
        assert all(v == 1.0 for v in report.per_class["background_confusion"].values())

    def test_independent_of_threads(self, seg_batch):
        _, batch = seg_batch
        rng = np.random.default_rng(0)
        predictions = {"target": rng.integers(0, 3, batch.targets["target"].shape)}
        one = evaluate_predictions("segmentation", predictions, batch, 3, threads=1)
        many = evaluate_predictions("segmentation", predictions, batch, 3, threads=4)
        assert one == many

    def test_shape_mismatch(self, seg_batch):
        _, batch = seg_batch
        predictions = {"target": batch.targets["target"][:, :8]}
        with pytest.raises(DataError):
            evaluate_predictions("segmentation", predictions, batch, 3)

    def test_empty_batch(self, seg_batch):
        _, batch = seg_batch
        empty = batch.take([])
        with pytest.raises(DataError):
            evaluate_predictions("segmentation", {"target": empty.targets["target"]}, empty, 3)


class TestJointEvaluation:
    """Tests for depth and normal reports."""

    def test_ground_truth_is_perfect(self, joint_batch):
        manifest, batch = joint_batch
        report = evaluate_predictions(
            "joint", targets_as_predictions("joint", batch), batch, manifest.classes
        )
        assert report.scalars["depth.rel"] == 0.0
        assert report.scalars["depth.delta_1.25"] == 1.0
        assert report.scalars["normal.mean_angle"] == pytest.approx(0.0, abs=1e-4)
        assert report.scalars["normal.within_11.25"] == 1.0
        assert report.classes == 0
        assert "depth.instance_delta_1.25" in report.per_class

    def test_missing_role(self, joint_batch):
        manifest, batch = joint_batch
        predictions = {"depth": batch.targets["depth"]}
        with pytest.raises(DataError):
            evaluate_predictions("joint", predictions, batch, manifest.classes)
