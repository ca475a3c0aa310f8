"""Tests for ambient settings and their YAML source."""

from pathlib import Path

import pytest

from asmlab.config import Settings, get_settings, load_yaml_config, reset_settings

SETTINGS_YAML = """\
logging:
  level: DEBUG
  format: json
eval:
  threads: 3
paths:
  out_dir: /tmp/asm-runs
numerics:
  float_check: false
"""


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch, tmp_path):
    """No stray ASMLAB_* variables, .env files or cached settings."""
    for name in ("LOG_LEVEL", "LOG_FORMAT", "THREADS", "DEFAULT_OUT_DIR", "FLOAT_CHECK"):
        monkeypatch.delenv(f"ASMLAB_{name}", raising=False)
    monkeypatch.setenv("HOME", str(tmp_path / "home"))
    monkeypatch.chdir(tmp_path)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def settings_file(tmp_path) -> Path:
    path = tmp_path / "settings.yaml"
    path.write_text(SETTINGS_YAML)
    return path


class TestLoadYamlConfig:
    """Tests for load_yaml_config."""

    def test_sections_flatten_to_fields(self, settings_file):
        assert load_yaml_config(settings_file) == {
            "log_level": "DEBUG",
            "log_format": "json",
            "threads": 3,
            "default_out_dir": "/tmp/asm-runs",
            "float_check": False,
        }

    def test_missing_file(self, tmp_path):
        assert load_yaml_config(tmp_path / "absent.yaml") == {}

    def test_default_location(self, tmp_path):
        home = tmp_path / "home" / ".asmlab"
        home.mkdir(parents=True)
        (home / "config.yaml").write_text("eval:\n  threads: 2\n")
        assert load_yaml_config() == {"threads": 2}

    def test_unknown_sections_ignored(self, tmp_path):
        path = tmp_path / "s.yaml"
        path.write_text("server:\n  port: 80\nlogging:\n  format: text\n")
        assert load_yaml_config(path) == {"log_format": "text"}

    def test_non_mapping_warns(self, tmp_path):
        path = tmp_path / "s.yaml"
        path.write_text("- just\n- a list\n")
        with pytest.warns(UserWarning):
            assert load_yaml_config(path) == {}

    def test_malformed_yaml_warns(self, tmp_path):
        path = tmp_path / "s.yaml"
        path.write_text("logging: [unclosed\n")
        with pytest.warns(UserWarning):
            assert load_yaml_config(path) == {}


class TestSettings:
    """Tests for Settings and the settings singleton."""

    def test_defaults(self):
        settings = Settings()
        assert settings.log_level == "INFO"
        assert settings.threads == 1
        assert settings.float_check is True
        assert settings.default_out_dir == Path("runs")

    def test_yaml_values(self, settings_file):
        settings = get_settings(settings_file, reload=True)
        assert settings.log_format == "json"
        assert settings.threads == 3
        assert settings.float_check is False

    def test_environment_beats_yaml(self, settings_file, monkeypatch):
        monkeypatch.setenv("ASMLAB_THREADS", "5")
        assert get_settings(settings_file, reload=True).threads == 5

    def test_kwargs_beat_environment(self, monkeypatch):
        monkeypatch.setenv("ASMLAB_THREADS", "5")
        assert Settings(threads=2).threads == 2

    def test_log_level_case_insensitive(self, monkeypatch):
        monkeypatch.setenv("ASMLAB_LOG_LEVEL", "debug")
        assert Settings().log_level == "DEBUG"

    def test_threads_must_be_positive(self):
        with pytest.raises(ValueError):
            Settings(threads=0)

    def test_out_dir_expands_home(self, tmp_path):
        settings = Settings(default_out_dir=Path("~/runs"))
        assert settings.default_out_dir == tmp_path / "home" / "runs"

    def test_singleton_until_reset(self, settings_file):
        first = get_settings(settings_file, reload=True)
        assert get_settings() is first
        reset_settings()
        assert get_settings() is not first
        assert get_settings().threads == 1
