"""Tests for the top-level CLI."""


class TestMain:
    """Tests for global options and help."""

    def test_version(self, invoke):
        result = invoke("--version")
        assert result.exit_code == 0
        assert "asmlab version" in result.output

    def test_help_lists_commands(self, invoke):
        result = invoke("--help")
        assert result.exit_code == 0
        for command in ("gen-data", "train", "eval", "analyze", "report"):
            assert command in result.output

    def test_missing_config_file(self, invoke, tmp_path):
        result = invoke("gen-data", "--config", tmp_path / "absent.cfg")
        assert result.exit_code == 2

    def test_global_out_and_force(self, invoke, tmp_path):
        out = tmp_path / "data"
        assert invoke("--out", out, "gen-data", "--n", 2, "--size", 16).exit_code == 0
        assert invoke("--out", out, "gen-data", "--n", 2, "--size", 16).exit_code == 2
        assert invoke("--out", out, "--force", "gen-data", "--n", 2, "--size", 16).exit_code == 0

    def test_default_out_dir_from_settings(self, invoke, tmp_path):
        result = invoke("gen-data", "--n", 1, "--size", 16)
        assert result.exit_code == 0, result.output
        assert (tmp_path / "runs" / "data" / "manifest.txt").is_file()
