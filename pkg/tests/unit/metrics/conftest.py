"""Pytest fixtures for metric tests."""

import numpy as np
import pytest

from asmlab.data.manifest import load_samples
from asmlab.data.scenes import gen_depth_normal_set
from asmlab.data.shapes import gen_segmentation_set
from asmlab.nets.network import build_network
from asmlab.nets.spec import LayerSpec, NetworkSpec


@pytest.fixture
def seg_batch(tmp_path):
    manifest = gen_segmentation_set(11, 6, 16, 3, 1, tmp_path / "seg")
    return manifest, load_samples(manifest)


@pytest.fixture
def joint_batch(tmp_path):
    manifest = gen_depth_normal_set(5, 4, 16, tmp_path / "joint", task="joint")
    return manifest, load_samples(manifest)


def analyzer_spec(kernel: int) -> NetworkSpec:
    return NetworkSpec(
        layers=(
            LayerSpec("conv1", ("input",), kernel, 2),
            LayerSpec("output", ("conv1",), 1, 1),
        ),
        inputs=(("input", 1),),
        role="analyzer",
        taps=("conv1",),
        name="probe",
    )


@pytest.fixture
def pointwise_analyzer():
    """1x1 analyzer: every position sees exactly one input pixel."""
    return build_network(analyzer_spec(1), seed=0)


@pytest.fixture
def local_analyzer():
    """3x3 analyzer, so neighbouring positions share input pixels."""
    return build_network(analyzer_spec(3), seed=1)


@pytest.fixture
def noise_images():
    return np.random.default_rng(21).uniform(size=(2, 1, 8, 8))
