"""Pytest fixtures for comparison tests."""

import pytest

from asmlab.metrics.report import MetricsReport


@pytest.fixture
def make_report():
    """Segmentation report factory sharing one manifest checksum by default."""

    def _make(label, miou, iou, checksum="feed"):
        return MetricsReport(
            task="segmentation",
            label=label,
            manifest_checksum=checksum,
            classes=3,
            samples=5,
            scalars={"miou": miou, "pixel_accuracy": 0.9},
            per_class={"iou": iou},
        )

    return _make


@pytest.fixture
def iid_report(make_report):
    return make_report("iid", 0.50, {0: 0.9, 1: 0.4, 2: 0.2})


@pytest.fixture
def asm_report(make_report):
    return make_report("asm", 0.55, {0: 0.9, 1: 0.5})
