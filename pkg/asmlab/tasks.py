"""Task kinds and how their targets map onto network heads and inputs.

Every task has one or more target *roles*. Single tasks use the role ``target``
(head ``output``, analyzer input ``input``); the joint task carries a ``depth``
and a ``normal`` role (heads ``output_depth``/``output_normal``, analyzer inputs
``input_depth``/``input_normal``).
"""

from typing import Literal

from asmlab.exceptions import ConfigurationError

TaskKind = Literal["segmentation", "depth", "normal", "joint"]
TargetKind = Literal["segmentation", "depth", "normal"]

TASKS: tuple[str, ...] = ("segmentation", "depth", "normal", "joint")
TASK_ALIASES: dict[str, str] = {
    "seg": "segmentation",
    "segmentation": "segmentation",
    "depth": "depth",
    "normal": "normal",
    "normals": "normal",
    "joint": "joint",
}


def resolve_task(name: str) -> TaskKind:
    """Accept a task name or its short alias."""
    task = TASK_ALIASES.get(name.strip().lower())
    if task is None:
        raise ConfigurationError(
            f"Unknown task: {name!r} (expected one of seg, depth, normal, joint)", task=name
        )
    return task  # type: ignore[return-value]


def target_roles(task: TaskKind) -> tuple[str, ...]:
    return ("depth", "normal") if task == "joint" else ("target",)


def role_kind(task: TaskKind, role: str) -> TargetKind:
    """The per-role loss/metric family."""
    if task == "joint":
        if role not in ("depth", "normal"):
            raise ConfigurationError(f"Joint task has no role {role}", role=role)
        return role  # type: ignore[return-value]
    return task


def role_channels(task: TaskKind, classes: int) -> dict[str, int]:
    """Channel count of each target role."""
    match task:
        case "segmentation":
            return {"target": classes}
        case "depth":
            return {"target": 1}
        case "normal":
            return {"target": 3}
        case "joint":
            return {"depth": 1, "normal": 3}
    raise ConfigurationError(f"Unknown task: {task}", task=task)


def head_name(role: str) -> str:
    return "output" if role == "target" else f"output_{role}"


def input_name(role: str) -> str:
    return "input" if role == "target" else f"input_{role}"


def role_of(layer_or_input: str) -> str:
    """Inverse of head_name / input_name."""
    for prefix in ("output", "input"):
        if layer_or_input.startswith(prefix):
            return layer_or_input.removeprefix(prefix).lstrip("_") or "target"
    raise ConfigurationError(f"{layer_or_input} is neither a head nor an input")

