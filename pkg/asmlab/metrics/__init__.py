"""Evaluation measures, their report format and analyzer introspection."""

from asmlab.metrics.boundary import BoundaryScore, boundary_prf, default_tolerance
from asmlab.metrics.depth import DepthMetrics, depth_metrics
from asmlab.metrics.evaluate import evaluate_predictions, predict_dataset, targets_as_predictions
from asmlab.metrics.instances import InstanceAggregate, InstanceSample, instance_aggregate
from asmlab.metrics.introspection import StimuliResult, Stimulus, top_stimuli, write_stimuli
from asmlab.metrics.normals import NormalMetrics, angular_errors, normal_metrics
from asmlab.metrics.report import MetricsReport, read_report_csv, write_report, write_report_csv
from asmlab.metrics.segmentation import (
    SegmentationMetrics,
    background_confusion,
    confusion_matrix,
    seg_metrics,
)

__all__ = [
    "BoundaryScore",
    "DepthMetrics",
    "InstanceAggregate",
    "InstanceSample",
    "MetricsReport",
    "NormalMetrics",
    "SegmentationMetrics",
    "StimuliResult",
    "Stimulus",
    "angular_errors",
    "background_confusion",
    "boundary_prf",
    "confusion_matrix",
    "default_tolerance",
    "depth_metrics",
    "evaluate_predictions",
    "instance_aggregate",
    "normal_metrics",
    "predict_dataset",
    "read_report_csv",
    "seg_metrics",
    "targets_as_predictions",
    "top_stimuli",
    "write_report",
    "write_report_csv",
    "write_stimuli",
]
