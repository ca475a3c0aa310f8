"""Tests for the eval command."""

import json

from asmlab.metrics.report import REPORT_NAME, SUMMARY_NAME, read_report_csv


class TestEval:
    """Tests for evaluation from the command line."""

    def test_ground_truth_is_perfect(self, invoke, dataset, tmp_path):
        out = tmp_path / "gt"
        result = invoke("eval", "--data", dataset, "--ground-truth", "--out", out)
        assert result.exit_code == 0, result.output
        report = read_report_csv(out)
        assert report.label == "ground-truth"
        assert report.scalars["miou"] == 1.0
        assert report.scalars["boundary_f"] == 1.0
        summary = json.loads((out / SUMMARY_NAME).read_text())
        assert summary["manifest_checksum"] == report.manifest_checksum

    def test_repeat_is_byte_identical(self, invoke, dataset, tmp_path):
        for name in ("a", "b"):
            result = invoke("eval", "--data", dataset, "--ground-truth", "--out", tmp_path / name)
            assert result.exit_code == 0, result.output
        first = (tmp_path / "a" / REPORT_NAME).read_bytes()
        assert first == (tmp_path / "b" / REPORT_NAME).read_bytes()

    def test_checkpoint_label_from_run_config(self, invoke, dataset, trained_run, tmp_path):
        out = tmp_path / "eval"
        result = invoke("eval", "--data", dataset, "--checkpoint", trained_run, "--out", out)
        assert result.exit_code == 0, result.output
        report = read_report_csv(out)
        assert report.label == "asm"
        assert 0.0 <= report.scalars["miou"] <= 1.0

    def test_explicit_label_and_split(self, invoke, dataset, tmp_path):
        out = tmp_path / "train-split"
        result = invoke(
            "eval", "--data", dataset, "--ground-truth", "--split", "train",
            "--label", "sanity", "--out", out,
        )
        assert result.exit_code == 0, result.output
        assert read_report_csv(out).label == "sanity"

    def test_needs_checkpoint_or_ground_truth(self, invoke, dataset, tmp_path):
        result = invoke("eval", "--data", dataset, "--out", tmp_path / "e")
        assert result.exit_code == 2

    def test_task_mismatch(self, invoke, trained_run, tmp_path):
        depth = tmp_path / "depth"
        gen = invoke("gen-data", "--task", "depth", "--n", 3, "--size", 16, "--out", depth)
        assert gen.exit_code == 0, gen.output
        result = invoke(
            "eval", "--data", depth, "--checkpoint", trained_run, "--out", tmp_path / "e"
        )
        assert result.exit_code == 2
