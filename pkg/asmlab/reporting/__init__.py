"""Comparison reports across training regimes: delta tables and SVG bar charts."""

from asmlab.reporting.compare import (
    DELTAS_NAME,
    NOT_AVAILABLE,
    ComparisonReport,
    MetricDelta,
    PairwiseComparison,
    build_comparison,
    compare_reports,
    format_deltas_csv,
    write_deltas,
)
from asmlab.reporting.svg import layout_bar_chart, render_bar_chart, write_charts

__all__ = [
    "DELTAS_NAME",
    "NOT_AVAILABLE",
    "ComparisonReport",
    "MetricDelta",
    "PairwiseComparison",
    "build_comparison",
    "compare_reports",
    "format_deltas_csv",
    "layout_bar_chart",
    "render_bar_chart",
    "write_charts",
    "write_deltas",
]
