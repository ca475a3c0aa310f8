"""Pytest fixtures for CLI tests."""

import pytest
from typer.testing import CliRunner

import asmlab.config
from asmlab.cli.main import app

SMALL_TRAIN_CFG = """\
# two quick iterations on quarter-width networks
regime = asm
max_iter = 2
batch_size = 2
width_divisor = 4
record_wall_time = false
checkpoint_every = 1
eval.split = val
"""


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Point ambient settings at a scratch directory and drop the cached instance."""
    monkeypatch.setenv("HOME", str(tmp_path / "home"))
    monkeypatch.setenv("ASMLAB_DEFAULT_OUT_DIR", str(tmp_path / "runs"))
    monkeypatch.setenv("ASMLAB_LOG_LEVEL", "WARNING")
    asmlab.config.reset_settings()
    yield
    asmlab.config.reset_settings()


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def invoke(runner):
    """Run the CLI with a list of arguments (paths are stringified)."""

    def _invoke(*args):
        return runner.invoke(app, [str(a) for a in args])

    return _invoke


@pytest.fixture
def dataset(invoke, tmp_path):
    """A small generated segmentation dataset directory."""
    out = tmp_path / "data"
    result = invoke(
        "gen-data", "--task", "seg", "--n", 8, "--size", 16, "--classes", 3,
        "--seed", 4, "--out", out,
    )
    assert result.exit_code == 0, result.output
    return out


@pytest.fixture
def train_cfg(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL_TRAIN_CFG)
    return path


@pytest.fixture
def trained_run(invoke, dataset, train_cfg, tmp_path):
    """An asm run directory trained on the dataset fixture."""
    out = tmp_path / "run"
    result = invoke("train", "--data", dataset, "--config", train_cfg, "--out", out)
    assert result.exit_code == 0, result.output
    return out
