"""Configuration management using pydantic-settings."""

import warnings
from pathlib import Path
from typing import Any, Literal, Tuple, Type

import yaml
from pydantic import Field, field_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)


# Nested YAML sections and the flat Settings fields they feed.
YAML_FIELDS: dict[tuple[str, str], str] = {
    ("logging", "level"): "log_level",
    ("logging", "format"): "log_format",
    ("eval", "threads"): "threads",
    ("paths", "out_dir"): "default_out_dir",
    ("numerics", "float_check"): "float_check",
}


def load_yaml_config(config_path: Path | None = None) -> dict[str, Any]:
    """
    Load ambient settings from a YAML file.

    The file is looked up at config_path, else ~/.asmlab/config.yaml. A missing
    file yields no values; an unreadable one warns and yields no values.

    Returns:
        Settings field values flattened from the nested sections in YAML_FIELDS
    """
    if config_path is None:
        config_path = Path.home() / ".asmlab" / "config.yaml"

    if not config_path.exists():
        return {}

    try:
        with open(config_path) as f:
            yaml_data = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as e:
        warnings.warn(f"Failed to load settings from {config_path}: {e}")
        return {}

    if not isinstance(yaml_data, dict):
        warnings.warn(f"Ignoring settings file {config_path}: top level is not a mapping")
        return {}

    flattened: dict[str, Any] = {}
    for (section, key), field_name in YAML_FIELDS.items():
        values = yaml_data.get(section)
        if isinstance(values, dict) and key in values:
            flattened[field_name] = values[key]
    return flattened


_config_path: Path | None = None


class YamlSettingsSource(PydanticBaseSettingsSource):
    """Settings source reading the file chosen by get_settings."""

    def get_field_value(self, field: Any, field_name: str) -> Tuple[Any, str, bool]:
        return None, field_name, False

    def __call__(self) -> dict[str, Any]:
        return load_yaml_config(_config_path)


class Settings(BaseSettings):
    """
    Ambient asmlab settings.

    Experiment parameters live in run configs (see asmlab.cli.runconfig); this class
    only covers process-wide concerns: logging, worker threads, where runs land and
    whether non-finite values are fatal.

    Sources, highest priority first: keyword arguments, ASMLAB_* environment
    variables, the YAML settings file, .env, field defaults.
    """

    model_config = SettingsConfigDict(
        env_prefix="ASMLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(
        default="INFO",
        description="Logging level",
    )
    log_format: Literal["json", "text"] = Field(default="text", description="Log format")

    threads: int = Field(default=1, ge=1, description="Worker cap for per-sample evaluation")
    default_out_dir: Path = Field(
        default=Path("runs"),
        description="Output root used when --out is not given",
    )
    float_check: bool = Field(
        default=True,
        description="Raise on NaN/Inf after every recorded op",
    )

    @field_validator("log_level", mode="before")
    @classmethod
    def upper_log_level(cls, v: Any) -> Any:
        return v.upper() if isinstance(v, str) else v

    @field_validator("default_out_dir")
    @classmethod
    def expand_out_dir(cls, v: Path) -> Path:
        return v.expanduser()

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        return (
            init_settings,
            env_settings,
            YamlSettingsSource(settings_cls),
            dotenv_settings,
        )


_settings: Settings | None = None


def get_settings(config_path: Path | None = None, reload: bool = False) -> Settings:
    """
    Return the process-wide settings, building them on first use.

    Args:
        config_path: Settings YAML to read instead of ~/.asmlab/config.yaml
        reload: Rebuild even if settings were already loaded
    """
    global _settings, _config_path
    if _settings is None or reload:
        _config_path = config_path
        _settings = Settings()
    return _settings


def reset_settings() -> None:
    """Forget the cached settings and any settings file chosen earlier."""
    global _settings, _config_path
    _settings = None
    _config_path = None
