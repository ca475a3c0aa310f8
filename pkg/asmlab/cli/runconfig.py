"""Experiment config files: flat ``key = value`` lines with ``#`` comments.

Unprefixed keys configure training; ``data.``, ``eval.``, ``report.`` and
``probe.`` prefixes address the other sections::

    # desk_seg.cfg
    regime = asm
    task = segmentation
    taps = conv1,conv2
    data.n = 200
    eval.split = val

Command-line flags override file values (last wins). Every key is validated
against the section schema; unknown keys are hard errors.
"""

import types
import typing
from collections.abc import Mapping
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from asmlab.data.imageio import read_bytes
from asmlab.data.shapes import MAX_CLUTTER
from asmlab.exceptions import ConfigurationError
from asmlab.tasks import TASK_ALIASES
from asmlab.training.config import TrainConfig
from asmlab.training.probes import TheoryProbeConfig

SECTIONS = ("data", "eval", "report", "probe")
NONE_VALUES = ("", "none", "null")
RUN_CONFIG_NAME = "run.cfg"


class DatasetParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    n: int = Field(default=200, ge=0, description="Number of samples")
    size: int = Field(default=64, ge=16, description="Image side in pixels")
    classes: int = Field(default=4, ge=2, le=255, description="Segmentation classes")
    clutter_level: int = Field(
        default=0, ge=0, le=MAX_CLUTTER, description="Extra objects per image"
    )
    val_fraction: float = Field(default=0.2, ge=0.0, lt=1.0)
    seed: int = Field(default=0, ge=0, description="Generation seed")


class EvalParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    split: Literal["train", "val", "all"] = "val"
    tolerance_px: float | None = Field(default=None, gt=0.0, description="Boundary tolerance")
    label: str | None = Field(default=None, description="Report label (default: regime)")


class ReportParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    candidate: str | None = Field(default=None, description="Label compared against the rest")
    families: tuple[str, ...] | None = Field(default=None, description="Per-class charts")


class RunConfig(BaseModel):
    """Every section a command may read, plus where the values came from."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    train: TrainConfig = Field(default_factory=TrainConfig)
    data: DatasetParams = Field(default_factory=DatasetParams)
    eval: EvalParams = Field(default_factory=EvalParams)
    report: ReportParams = Field(default_factory=ReportParams)
    probe: TheoryProbeConfig = Field(default_factory=TheoryProbeConfig)
    source: tuple[str, ...] = ()


SECTION_MODELS: dict[str, type[BaseModel]] = {
    "train": TrainConfig,
    "data": DatasetParams,
    "eval": EvalParams,
    "report": ReportParams,
    "probe": TheoryProbeConfig,
}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Flat key -> raw string value; later lines win.

    Raises:
        ConfigurationError: On a non-comment line without '=' or with an empty key
    """
    values: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigurationError(
                f"{source}:{line_no}: expected 'key = value'", path=source, line=line_no
            )
        values[key] = value.strip()
    return values


def read_config_file(path: Path) -> dict[str, str]:
    try:
        text = read_bytes(path).decode("utf-8")
    except UnicodeDecodeError as e:
        raise ConfigurationError(f"Config file {path} is not UTF-8", path=str(path)) from e
    return parse_config_text(text, source=str(path))


def _is_sequence(annotation: Any) -> bool:
    if typing.get_origin(annotation) in (tuple, list):
        return True
    if isinstance(annotation, types.UnionType) or typing.get_origin(annotation) is typing.Union:
        return any(_is_sequence(a) for a in typing.get_args(annotation))
    return False


def _coerce(model: type[BaseModel], key: str, value: Any) -> Any:
    """Turn raw file strings into what the schema expects: lists and None."""
    if not isinstance(value, str):
        return value
    field = model.model_fields.get(key)
    if field is None:
        return value
    if value.lower() in NONE_VALUES and not field.is_required() and field.default is None:
        return None
    if _is_sequence(field.annotation):
        return [item.strip() for item in value.split(",") if item.strip()]
    if key == "task":
        return TASK_ALIASES.get(value.strip().lower(), value)
    return value


def split_sections(values: Mapping[str, Any]) -> dict[str, dict[str, Any]]:
    """Route flat keys to sections by prefix; unprefixed keys are training keys."""
    sections: dict[str, dict[str, Any]] = {name: {} for name in SECTION_MODELS}
    for key, value in values.items():
        section, dot, name = key.partition(".")
        if not dot:
            section, name = "train", key
        elif section not in SECTIONS:
            raise ConfigurationError(f"Unknown config section in key {key!r}", key=key)
        sections[section][name] = _coerce(SECTION_MODELS[section], name, value)
    return sections


def build_run_config(values: Mapping[str, Any], source: tuple[str, ...] = ()) -> RunConfig:
    """Validate flat values into a RunConfig.

    Raises:
        ConfigurationError: Listing every rejected key
    """
    sections = split_sections(values)
    problems: list[str] = []
    built: dict[str, BaseModel] = {}
    for name, model in SECTION_MODELS.items():
        try:
            built[name] = model.model_validate(sections[name])
        except ValidationError as e:
            for err in e.errors():
                loc = ".".join(str(p) for p in err["loc"]) or name
                key = loc if name == "train" else f"{name}.{loc}"
                problems.append(f"{key}: {err['msg']}")
    if problems:
        raise ConfigurationError(
            "Invalid run config: " + "; ".join(problems), errors=problems, source=list(source)
        )
    return RunConfig(source=source, **built)  # type: ignore[arg-type]


def load_run_config(
    path: Path | None,
    overrides: Mapping[str, Any] | None = None,
    defaults: Mapping[str, Any] | None = None,
) -> RunConfig:
    """defaults, then file values (if any), then flag overrides; None overrides are ignored."""
    values: dict[str, Any] = dict(defaults or {})
    if path is not None:
        values.update(read_config_file(path))
    source = [str(path)] if path is not None else []
    flags = {k: v for k, v in (overrides or {}).items() if v is not None}
    if flags:
        values.update(flags)
        source.append("flags:" + ",".join(sorted(flags)))
    return build_run_config(values, tuple(source))


def format_run_config(config: RunConfig) -> str:
    """Flat file text that load_run_config reads back to an equal config."""
    lines = []
    for name, model in SECTION_MODELS.items():
        section = getattr(config, name)
        for key in model.model_fields:
            value = getattr(section, key)
            if isinstance(value, (tuple, list)):
                value = ",".join(str(v) for v in value)
            elif value is None:
                value = "none"
            prefix = "" if name == "train" else f"{name}."
            lines.append(f"{prefix}{key} = {value}")
    return "\n".join(lines) + "\n"
