"""Pytest fixtures for training tests."""

import pytest

from asmlab.data.manifest import load_samples
from asmlab.data.shapes import gen_segmentation_set
from asmlab.engine.tensor import Tensor
from asmlab.training.config import TrainConfig
from asmlab.training.players import build_players, target_tensors
from asmlab.training.steps import TrainState


@pytest.fixture
def seg_manifest(tmp_path):
    """Eight 16x16 three-class samples."""
    return gen_segmentation_set(2, 8, 16, 3, 1, tmp_path / "data")


@pytest.fixture
def make_config():
    """Small, fast configs: quarter-width networks, two-sample batches."""

    def _make(**overrides):
        values = {
            "regime": "asm",
            "task": "segmentation",
            "max_iter": 2,
            "batch_size": 2,
            "width_divisor": 4,
            "log_every": 1,
        }
        values.update(overrides)
        return TrainConfig(**values)

    return _make


@pytest.fixture
def make_state(seg_manifest):
    """TrainState plus one (x, y) batch for a config."""

    def _make(config):
        batch = load_samples(seg_manifest, seg_manifest.ids[:2])
        state = TrainState(config, build_players(config, 3), 3)
        return state, Tensor(batch.images), target_tensors(config.task, batch, 3)

    return _make
