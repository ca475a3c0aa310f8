"""Side-by-side comparison of MetricsReports evaluated on the same frozen manifest."""

import csv
import io
import math
import re
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

from asmlab.data.imageio import write_text
from asmlab.exceptions import ManifestMismatchError, UsageError
from asmlab.logging_config import get_logger
from asmlab.metrics.report import MetricsReport

logger = get_logger(__name__)

DELTAS_NAME = "deltas.csv"
NOT_AVAILABLE = "n/a"
DELTA_COLUMNS = (
    "candidate",
    "baseline",
    "metric",
    "class",
    "baseline_value",
    "candidate_value",
    "delta",
)


@dataclass(frozen=True)
class MetricDelta:
    """candidate - baseline for one metric; None where either side has no finite value."""

    metric: str
    class_id: int | None
    baseline: float | None
    candidate: float | None

    @property
    def delta(self) -> float | None:
        if self.baseline is None or self.candidate is None:
            return None
        if math.isnan(self.baseline) or math.isnan(self.candidate):
            return None
        return self.candidate - self.baseline

    @property
    def available(self) -> bool:
        return self.delta is not None


@dataclass
class PairwiseComparison:
    baseline: str
    candidate: str
    task: str
    scalars: list[MetricDelta] = field(default_factory=list)
    per_class: list[MetricDelta] = field(default_factory=list)

    def family(self, name: str) -> list[MetricDelta]:
        return [d for d in self.per_class if d.metric == name]

    @property
    def families(self) -> list[str]:
        return list(dict.fromkeys(d.metric for d in self.per_class))

    @property
    def unavailable(self) -> list[MetricDelta]:
        return [d for d in (*self.scalars, *self.per_class) if not d.available]


@dataclass
class ComparisonReport:
    """One candidate regime against every other evaluated regime."""

    candidate: str
    manifest_checksum: str
    reports: list[MetricsReport]
    pairs: list[PairwiseComparison] = field(default_factory=list)
    charts: list[Path] = field(default_factory=list)


def _ordered_union(*keys: Sequence) -> list:
    return list(dict.fromkeys(k for seq in keys for k in seq))


def _check_same_manifest(baseline: MetricsReport, candidate: MetricsReport) -> None:
    if baseline.manifest_checksum != candidate.manifest_checksum:
        raise ManifestMismatchError(baseline.manifest_checksum, candidate.manifest_checksum)
    if baseline.task != candidate.task:
        raise UsageError(
            "Reports score different tasks", baseline=baseline.task, candidate=candidate.task
        )


def compare_reports(baseline: MetricsReport, candidate: MetricsReport) -> PairwiseComparison:
    """Per-metric and per-class deltas of candidate over baseline.

    Classes present in only one report yield rows without a delta.

    Raises:
        ManifestMismatchError: If the reports were evaluated on different manifests
        UsageError: If the reports score different tasks
    """
    _check_same_manifest(baseline, candidate)
    pair = PairwiseComparison(baseline.label, candidate.label, candidate.task)
    for name in _ordered_union(baseline.scalars, candidate.scalars):
        pair.scalars.append(
            MetricDelta(name, None, baseline.scalars.get(name), candidate.scalars.get(name))
        )
    for family in _ordered_union(baseline.per_class, candidate.per_class):
        base = baseline.per_class.get(family, {})
        cand = candidate.per_class.get(family, {})
        for class_id in sorted(set(base) | set(cand)):
            pair.per_class.append(
                MetricDelta(family, class_id, base.get(class_id), cand.get(class_id))
            )
    return pair


def pick_candidate(reports: Sequence[MetricsReport], label: str | None = None) -> MetricsReport:
    """The last report labelled label; by default the last "asm" report, else the last one."""
    if label is None:
        label = "asm" if any(r.label == "asm" for r in reports) else reports[-1].label
    for report in reversed(reports):
        if report.label == label:
            return report
    raise UsageError(
        f"No report labelled {label!r}", label=label, available=[r.label for r in reports]
    )


def build_comparison(
    reports: Sequence[MetricsReport], candidate: str | None = None
) -> ComparisonReport:
    """Compare the candidate against every other report.

    A report may appear more than once; a copy of the candidate compares to all-zero deltas.

    Raises:
        UsageError: With fewer than two reports or an unknown candidate label
        ManifestMismatchError: If any two reports come from different manifests
    """
    if len(reports) < 2:
        raise UsageError("A comparison needs at least two reports", reports=len(reports))
    chosen = pick_candidate(reports, candidate)
    comparison = ComparisonReport(chosen.label, chosen.manifest_checksum, list(reports))
    for report in reports:
        _check_same_manifest(report, chosen)
        if report is not chosen:
            comparison.pairs.append(compare_reports(report, chosen))
    logger.info(
        "comparison_built",
        candidate=chosen.label,
        baselines=[p.baseline for p in comparison.pairs],
        unavailable=sum(len(p.unavailable) for p in comparison.pairs),
    )
    return comparison


def _cell(value: float | None) -> str:
    if value is None or math.isnan(value):
        return NOT_AVAILABLE
    return repr(float(value))


def format_deltas_csv(comparison: ComparisonReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(DELTA_COLUMNS)
    for pair in comparison.pairs:
        for d in (*pair.scalars, *pair.per_class):
            writer.writerow(
                [
                    pair.candidate,
                    pair.baseline,
                    d.metric,
                    "" if d.class_id is None else d.class_id,
                    _cell(d.baseline),
                    _cell(d.candidate),
                    _cell(d.delta),
                ]
            )
    return buf.getvalue()


def write_deltas(comparison: ComparisonReport, out_dir: Path) -> Path:
    path = out_dir / DELTAS_NAME
    write_text(path, format_deltas_csv(comparison))
    return path


def slug(text: str) -> str:
    """File-name-safe form of a label or metric family."""
    return re.sub(r"[^A-Za-z0-9_.-]+", "-", text).strip("-") or "unnamed"
