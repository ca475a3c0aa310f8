"""Pytest fixtures for synthetic dataset tests."""

import pytest

from asmlab.data.scenes import gen_depth_normal_set
from asmlab.data.shapes import gen_segmentation_set


@pytest.fixture
def seg_set(tmp_path):
    """Ten 16x16 four-class segmentation samples."""
    return gen_segmentation_set(7, 10, 16, 4, 1, tmp_path / "seg")


@pytest.fixture
def joint_set(tmp_path):
    """Six 16x16 rooms listing both depth and normal targets."""
    return gen_depth_normal_set(3, 6, 16, tmp_path / "joint", task="joint")
