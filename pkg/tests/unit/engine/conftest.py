"""Pytest fixtures for tensor engine tests."""

import numpy as np
import pytest

from asmlab.engine.tensor import set_finite_check


@pytest.fixture
def rng():
    """Seeded generator so every probe point is reproducible."""
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def finite_check_on():
    """Every test starts and ends with the non-finite hard error enabled."""
    set_finite_check(True)
    yield
    set_finite_check(True)
