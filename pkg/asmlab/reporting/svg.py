"""Per-class improvement bar charts as standalone SVG, rendered through jinja2."""

from dataclasses import dataclass
from pathlib import Path

from jinja2 import Environment, PackageLoader, StrictUndefined, select_autoescape

from asmlab.data.imageio import write_text
from asmlab.logging_config import get_logger
from asmlab.reporting.compare import (
    NOT_AVAILABLE,
    ComparisonReport,
    MetricDelta,
    PairwiseComparison,
    slug,
)

logger = get_logger(__name__)

CHART_TEMPLATE = "bar_chart.svg.j2"
BAR_WIDTH = 28
BAR_GAP = 12
PLOT_HEIGHT = 220
MARGIN_LEFT = 56
MARGIN_TOP = 48
MARGIN_BOTTOM = 48
POSITIVE_FILL = "#2b8a3e"
NEGATIVE_FILL = "#c92a2a"

_env = Environment(
    loader=PackageLoader("asmlab.reporting", "templates"),
    autoescape=select_autoescape(default=True, default_for_string=True),
    undefined=StrictUndefined,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)


@dataclass(frozen=True)
class ChartBar:
    label: str
    x: float
    y: float
    height: float
    fill: str
    text: str
    available: bool


@dataclass(frozen=True)
class BarChart:
    title: str
    subtitle: str
    width: int
    height: int
    zero_y: float
    plot_left: int
    plot_right: int
    scale_text: str
    bars: tuple[ChartBar, ...]


def improvement_points(delta: MetricDelta) -> float | None:
    """Delta in percentage points (metrics are fractions in [0, 1])."""
    return None if delta.delta is None else 100.0 * delta.delta


def layout_bar_chart(title: str, subtitle: str, deltas: list[MetricDelta]) -> BarChart:
    """Place one bar per class around a zero line; an all-zero series is a flat chart."""
    values = [improvement_points(d) for d in deltas]
    peak = max((abs(v) for v in values if v is not None), default=0.0)
    half = PLOT_HEIGHT / 2
    zero_y = MARGIN_TOP + half
    bars = []
    for i, (d, v) in enumerate(zip(deltas, values)):
        x = MARGIN_LEFT + BAR_GAP + i * (BAR_WIDTH + BAR_GAP)
        label = "all" if d.class_id is None else str(d.class_id)
        if v is None:
            bars.append(ChartBar(label, x, zero_y, 0.0, "none", NOT_AVAILABLE, False))
            continue
        height = 0.0 if peak == 0 else abs(v) / peak * half
        y = zero_y - height if v >= 0 else zero_y
        fill = POSITIVE_FILL if v >= 0 else NEGATIVE_FILL
        bars.append(ChartBar(label, x, y, height, fill, f"{v:+.2f}", True))
    plot_right = MARGIN_LEFT + BAR_GAP + len(deltas) * (BAR_WIDTH + BAR_GAP)
    return BarChart(
        title=title,
        subtitle=subtitle,
        width=plot_right + BAR_GAP,
        height=MARGIN_TOP + PLOT_HEIGHT + MARGIN_BOTTOM,
        zero_y=zero_y,
        plot_left=MARGIN_LEFT,
        plot_right=plot_right,
        scale_text=f"±{peak:.2f} pts",
        bars=tuple(bars),
    )


def render_bar_chart(chart: BarChart) -> str:
    return _env.get_template(CHART_TEMPLATE).render(chart=chart, bar_width=BAR_WIDTH)


def family_chart(pair: PairwiseComparison, family: str) -> str:
    chart = layout_bar_chart(
        f"{family}: {pair.candidate} vs {pair.baseline}",
        "improvement per class (percentage points)",
        pair.family(family),
    )
    return render_bar_chart(chart)


def write_charts(
    comparison: ComparisonReport, out_dir: Path, families: list[str] | None = None
) -> list[Path]:
    """One SVG per (baseline, per-class family); unknown families are skipped."""
    paths = []
    for pair in comparison.pairs:
        wanted = pair.families if families is None else families
        for family in wanted:
            if family not in pair.families:
                logger.warning("chart_family_missing", family=family, baseline=pair.baseline)
                continue
            name = f"{slug(pair.candidate)}_vs_{slug(pair.baseline)}_{slug(family)}.svg"
            path = out_dir / name
            write_text(path, family_chart(pair, family))
            paths.append(path)
    comparison.charts.extend(paths)
    return paths
