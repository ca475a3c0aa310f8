"""Tests for IID and structure-regularization losses."""

import math

import numpy as np
import pytest

from asmlab.engine.gradcheck import grad_check
from asmlab.engine.tensor import Tensor
from asmlab.exceptions import UsageError
from asmlab.losses.pixelwise import iid_loss, one_hot, sr_loss


def column(*values):
    """A 1 x C x 1 x 1 map."""
    return Tensor(np.array(values, dtype=float).reshape(1, len(values), 1, 1))


class TestIidLoss:
    """Tests for iid_loss."""

    def test_regression_exact_prediction(self):
        y = Tensor(np.random.default_rng(0).uniform(1, 5, size=(2, 1, 4, 4)))
        assert iid_loss("depth", y, Tensor(y.values.copy())).item() == 0.0

    def test_equal_logits_two_classes(self):
        """Uniform logits cost ln 2 per pixel."""
        y = Tensor(one_hot(np.array([[[0, 1], [1, 0]]]), 2))
        logits = Tensor(np.zeros((1, 2, 2, 2)))
        assert iid_loss("segmentation", y, logits).item() == pytest.approx(math.log(2))

    def test_depth_offset_by_one(self):
        y = Tensor(np.full((1, 1, 3, 3), 2.0))
        assert iid_loss("depth", y, Tensor(np.full((1, 1, 3, 3), 3.0))).item() == 0.5

    def test_depth_matches_reference_loop(self):
        """Half mean squared error computed pixel by pixel."""
        rng = np.random.default_rng(3)
        y = rng.uniform(1, 4, size=(2, 1, 3, 5))
        pred = rng.uniform(1, 4, size=y.shape)
        total = 0.0
        for n in range(2):
            for i in range(3):
                for j in range(5):
                    total += 0.5 * (pred[n, 0, i, j] - y[n, 0, i, j]) ** 2
        expected = total / (2 * 3 * 5)
        assert iid_loss("depth", Tensor(y), Tensor(pred)).item() == pytest.approx(expected)

    def test_normal_is_scale_invariant(self):
        y = column(0.0, 0.0, 1.0)
        assert iid_loss("normal", y, column(0.0, 0.0, 7.0)).item() == pytest.approx(0.0)

    def test_orthogonal_normals(self):
        """Unit vectors at 90 degrees are sqrt(2) apart."""
        assert iid_loss("normal", column(1.0, 0.0, 0.0), column(0.0, 1.0, 0.0)).item() == (
            pytest.approx(2.0)
        )

    def test_joint_sums_terms(self):
        depth = Tensor(np.full((1, 1, 2, 2), 2.0))
        normal = Tensor(np.tile(np.array([0.0, 0.0, 1.0]).reshape(1, 3, 1, 1), (1, 1, 2, 2)))
        y = {"depth": depth, "normal": normal}
        pred = {"depth": Tensor(np.full((1, 1, 2, 2), 3.0)), "normal": normal}
        assert iid_loss("joint", y, pred).item() == pytest.approx(0.5)

    def test_joint_needs_mapping(self):
        with pytest.raises(UsageError):
            iid_loss("joint", Tensor(np.zeros((1, 1, 2, 2))), Tensor(np.zeros((1, 1, 2, 2))))

    def test_shape_mismatch(self):
        with pytest.raises(UsageError):
            iid_loss("depth", Tensor(np.zeros((1, 1, 2, 2))), Tensor(np.zeros((1, 1, 3, 3))))

    def test_cross_entropy_gradient(self):
        rng = np.random.default_rng(1)
        y = Tensor(one_hot(rng.integers(0, 3, size=(2, 4, 4)), 3))
        logits = Tensor(rng.normal(size=(2, 3, 4, 4)), requires_grad=True, name="logits")
        report = grad_check(lambda: iid_loss("segmentation", y, logits).value, [logits])
        assert report.passed


class TestSrLoss:
    """Tests for sr_loss."""

    def test_depth_exact_reconstruction(self):
        y = Tensor(np.full((1, 1, 2, 2), 1.5))
        assert sr_loss("depth", y, Tensor(y.values.copy())).item() == 0.0

    def test_uniform_segmentation_reconstruction(self):
        """True class 0 reconstructed as [0.5, 0.5] costs ln 2."""
        assert sr_loss("segmentation", column(1.0, 0.0), column(0.5, 0.5)).item() == (
            pytest.approx(math.log(2))
        )

    def test_normal_reconstruction_scale(self):
        assert sr_loss("normal", column(0.0, 0.0, 1.0), column(0.0, 0.0, 2.0)).item() == (
            pytest.approx(0.0)
        )

    def test_depth_is_full_mse(self):
        """The reconstruction loss on depth is the plain mean squared error."""
        y = Tensor(np.zeros((1, 1, 2, 2)))
        assert sr_loss("depth", y, Tensor(np.full((1, 1, 2, 2), 2.0))).item() == 4.0

    def test_non_simplex_reconstruction(self):
        with pytest.raises(UsageError):
            sr_loss("segmentation", column(1.0, 0.0), column(2.0, 3.0))


class TestOneHot:
    """Tests for one_hot."""

    def test_layout(self):
        out = one_hot(np.array([[[2, 0]]]), 3)
        assert out.shape == (1, 3, 1, 2)
        np.testing.assert_array_equal(out[0, :, 0, 0], [0, 0, 1])

    def test_out_of_range(self):
        with pytest.raises(UsageError):
            one_hot(np.array([[[3]]]), 3)
