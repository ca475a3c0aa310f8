"""Tests for the report command."""

import csv

from asmlab.reporting.compare import DELTAS_NAME


def ground_truth_eval(invoke, dataset, out):
    result = invoke("eval", "--data", dataset, "--ground-truth", "--out", out)
    assert result.exit_code == 0, result.output
    return out


class TestReport:
    """Tests for comparing evaluated regimes."""

    def test_same_report_twice_has_zero_deltas(self, invoke, dataset, tmp_path):
        evaluated = ground_truth_eval(invoke, dataset, tmp_path / "gt")
        out = tmp_path / "report"
        result = invoke("report", evaluated, evaluated, "--out", out)
        assert result.exit_code == 0, result.output
        with (out / DELTAS_NAME).open() as f:
            rows = list(csv.DictReader(f))
        assert rows
        assert {row["delta"] for row in rows} == {"0.0"}
        assert list(out.glob("*.svg"))

    def test_asm_against_ground_truth(self, invoke, dataset, trained_run, tmp_path):
        gt = ground_truth_eval(invoke, dataset, tmp_path / "gt")
        asm = tmp_path / "asm"
        evaluated = invoke("eval", "--data", dataset, "--checkpoint", trained_run, "--out", asm)
        assert evaluated.exit_code == 0, evaluated.output
        out = tmp_path / "report"
        result = invoke("report", gt, asm, "--family", "iou", "--out", out)
        assert result.exit_code == 0, result.output
        assert [p.name for p in out.glob("*.svg")] == ["asm_vs_ground-truth_iou.svg"]
        with (out / DELTAS_NAME).open() as f:
            candidates = {row["candidate"] for row in csv.DictReader(f)}
        assert candidates == {"asm"}

    def test_manifest_mismatch(self, invoke, dataset, tmp_path):
        other = tmp_path / "other"
        gen = invoke(
            "gen-data", "--n", 8, "--size", 16, "--classes", 3, "--seed", 99, "--out", other
        )
        assert gen.exit_code == 0
        first = ground_truth_eval(invoke, dataset, tmp_path / "a")
        second = ground_truth_eval(invoke, other, tmp_path / "b")
        result = invoke("report", first, second, "--out", tmp_path / "r")
        assert result.exit_code == 2

    def test_single_report(self, invoke, dataset, tmp_path):
        evaluated = ground_truth_eval(invoke, dataset, tmp_path / "gt")
        result = invoke("report", evaluated, "--out", tmp_path / "r")
        assert result.exit_code == 2

    def test_unknown_candidate(self, invoke, dataset, tmp_path):
        evaluated = ground_truth_eval(invoke, dataset, tmp_path / "gt")
        result = invoke(
            "report", evaluated, evaluated, "--candidate", "cgan", "--out", tmp_path / "r"
        )
        assert result.exit_code == 2
