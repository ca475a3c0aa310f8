"""Tests for the metrics report CSV and summary line."""

import json
import math

import pytest

from asmlab.exceptions import FileError, FormatError
from asmlab.metrics.report import (
    MetricsReport,
    format_report_csv,
    parse_report_csv,
    read_report_csv,
    write_report,
)


@pytest.fixture
def report():
    return MetricsReport(
        task="segmentation",
        label="asm",
        manifest_checksum="abc123",
        classes=2,
        samples=4,
        scalars={"miou": 0.75, "boundary_f": 0.5},
        per_class={"iou": {0: 1.0, 1: 0.5}},
        confusion=[[3, 0], [1, 2]],
        flags=["instance_missing:1"],
    )


class TestReportCsv:
    """Tests for the block-structured CSV."""

    def test_parse_inverts_format(self, report):
        assert parse_report_csv(format_report_csv(report)) == report

    def test_blocks_in_order(self, report):
        blocks = [line for line in format_report_csv(report).splitlines() if line.startswith("#")]
        assert blocks == ["# meta", "# scalars", "# per_class", "# confusion", "# flags"]

    def test_nan_survives(self, report):
        report.scalars["miou"] = float("nan")
        parsed = parse_report_csv(format_report_csv(report))
        assert math.isnan(parsed.scalars["miou"])

    def test_unknown_block(self):
        with pytest.raises(FormatError):
            parse_report_csv("# meta\nkey,value\ntask,depth\n# extras\nx\n")

    def test_missing_meta(self):
        with pytest.raises(FormatError):
            parse_report_csv("# scalars\nmetric,value\nrel,0.1\n")

    def test_malformed_value(self):
        with pytest.raises(FormatError):
            parse_report_csv("# meta\nkey,value\ntask,depth\n# scalars\nmetric,value\nrel,x\n")


class TestWriteReport:
    """Tests for report files."""

    def test_write_and_read_directory(self, report, tmp_path):
        csv_path, summary_path = write_report(report, tmp_path)
        assert read_report_csv(tmp_path) == report
        assert csv_path.read_text() == format_report_csv(report)
        summary = json.loads(summary_path.read_text())
        assert summary["scalars"] == {"miou": 0.75, "boundary_f": 0.5}
        assert "per_class" not in summary

    def test_summary_nan_is_null(self, report):
        report.scalars["miou"] = float("nan")
        assert json.loads(report.summary_line())["scalars"]["miou"] is None

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileError):
            read_report_csv(tmp_path / "absent.csv")
