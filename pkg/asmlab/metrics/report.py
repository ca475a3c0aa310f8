"""MetricsReport model and its CSV / JSON-line serializations.

The CSV holds one block per metric family, each introduced by a ``# <block>``
line followed by a header row::

    # meta        key,value
    # scalars     metric,value
    # per_class   family,class,value
    # confusion   gt\\pred,0,1,...
    # flags       flag
"""

import csv
import io
import math
from pathlib import Path

from pydantic import BaseModel, Field

from asmlab.data.imageio import read_bytes, write_text
from asmlab.exceptions import FormatError

REPORT_NAME = "metrics.csv"
SUMMARY_NAME = "summary.jsonl"
BLOCKS = ("meta", "scalars", "per_class", "confusion", "flags")


class MetricsReport(BaseModel):
    """Evaluation of one set of predictions against one frozen manifest."""

    task: str = Field(..., description="Task kind the predictions were scored as")
    label: str = Field(default="", description="Run label, usually the regime")
    manifest_checksum: str = Field(default="", description="sha256 of the evaluated manifest")
    classes: int = Field(default=0, description="Class count (segmentation only)")
    samples: int = Field(default=0, description="Number of evaluated samples")
    scalars: dict[str, float] = Field(default_factory=dict, description="Headline metrics")
    per_class: dict[str, dict[int, float]] = Field(
        default_factory=dict, description="Per-class values by metric family"
    )
    confusion: list[list[int]] | None = Field(default=None, description="C x C, rows = gt")
    flags: list[str] = Field(default_factory=list, description="Omissions and warnings")

    def summary_line(self) -> str:
        """Single-line JSON record for machine diffing (NaN becomes null)."""
        return self.model_dump_json(
            include={"task", "label", "manifest_checksum", "classes", "samples", "scalars"}
        )


def _fmt(value: float) -> str:
    return "nan" if math.isnan(value) else repr(float(value))


def format_report_csv(report: MetricsReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    buf.write("# meta\n")
    writer.writerow(["key", "value"])
    writer.writerow(["task", report.task])
    writer.writerow(["label", report.label])
    writer.writerow(["manifest_checksum", report.manifest_checksum])
    writer.writerow(["classes", report.classes])
    writer.writerow(["samples", report.samples])

    buf.write("# scalars\n")
    writer.writerow(["metric", "value"])
    for name, value in report.scalars.items():
        writer.writerow([name, _fmt(value)])

    buf.write("# per_class\n")
    writer.writerow(["family", "class", "value"])
    for family, values in report.per_class.items():
        for class_id in sorted(values):
            writer.writerow([family, class_id, _fmt(values[class_id])])

    if report.confusion is not None:
        buf.write("# confusion\n")
        writer.writerow(["gt\\pred", *range(len(report.confusion))])
        for i, row in enumerate(report.confusion):
            writer.writerow([i, *row])

    buf.write("# flags\n")
    writer.writerow(["flag"])
    for flag in report.flags:
        writer.writerow([flag])
    return buf.getvalue()


def parse_report_csv(text: str, source: str | None = None) -> MetricsReport:
    """Inverse of format_report_csv.

    Raises:
        FormatError: On unknown blocks, missing header rows or malformed values
    """
    blocks: dict[str, list[list[str]]] = {}
    current: str | None = None
    for row in csv.reader(io.StringIO(text)):
        if not row:
            continue
        if row[0].startswith("# "):
            current = row[0][2:].strip()
            if current not in BLOCKS:
                raise FormatError("report", f"unknown block {current!r}", path=source)
            blocks[current] = []
            continue
        if current is None:
            raise FormatError("report", "data before the first block header", path=source)
        blocks[current].append(row)
    if "meta" not in blocks:
        raise FormatError("report", "missing meta block", path=source)

    try:
        meta = {k: v for k, v in blocks["meta"][1:]}
        per_class: dict[str, dict[int, float]] = {}
        for family, class_id, value in blocks.get("per_class", [[]])[1:]:
            per_class.setdefault(family, {})[int(class_id)] = float(value)
        confusion = None
        if "confusion" in blocks:
            confusion = [[int(v) for v in row[1:]] for row in blocks["confusion"][1:]]
        return MetricsReport(
            task=meta["task"],
            label=meta.get("label", ""),
            manifest_checksum=meta.get("manifest_checksum", ""),
            classes=int(meta.get("classes", 0)),
            samples=int(meta.get("samples", 0)),
            scalars={k: float(v) for k, v in blocks.get("scalars", [[]])[1:]},
            per_class=per_class,
            confusion=confusion,
            flags=[row[0] for row in blocks.get("flags", [[]])[1:]],
        )
    except (KeyError, ValueError) as e:
        raise FormatError("report", str(e), path=source) from e


def write_report(report: MetricsReport, out_dir: Path) -> tuple[Path, Path]:
    """Write metrics.csv and summary.jsonl under out_dir; returns both paths."""
    csv_path = out_dir / REPORT_NAME
    summary_path = out_dir / SUMMARY_NAME
    write_text(csv_path, format_report_csv(report))
    write_text(summary_path, report.summary_line() + "\n")
    return csv_path, summary_path


def write_report_csv(report: MetricsReport, path: Path) -> None:
    write_text(path, format_report_csv(report))


def read_report_csv(path: Path) -> MetricsReport:
    """Load a report from metrics.csv, or from a directory containing one."""
    if path.is_dir():
        path = path / REPORT_NAME
    try:
        text = read_bytes(path).decode("utf-8")
    except UnicodeDecodeError as e:
        raise FormatError("report", "not UTF-8 text", path=str(path)) from e
    return parse_report_csv(text, source=str(path))
