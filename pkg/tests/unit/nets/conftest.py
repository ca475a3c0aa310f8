"""Pytest fixtures for network tests."""

import numpy as np
import pytest

from asmlab.nets.network import build_network
from asmlab.nets.spec import LayerSpec, NetworkSpec, load_template


@pytest.fixture
def tiny_spec():
    """Two-level encoder-decoder with one skip, small enough for gradient checks."""
    return NetworkSpec(
        layers=(
            LayerSpec("conv1", ("input",), 3, 3, stride=2),
            LayerSpec("conv2", ("conv1",), 3, 4, stride=2),
            LayerSpec("conv3", ("conv2", "conv1"), 3, 3, upsample=True),
            LayerSpec("output", ("conv3",), 1, 2, upsample=True),
        ),
        inputs=(("input", 2),),
        role="analyzer",
        taps=("conv1", "conv2"),
        reg_tap="conv2",
        name="tiny",
    )


@pytest.fixture
def desk_analyzer():
    return build_network(load_template("desk_analyzer"), seed=3)


@pytest.fixture
def image_batch():
    return np.random.default_rng(7).uniform(size=(2, 1, 16, 16))
