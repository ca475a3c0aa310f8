"""The networks of one run, wired to the task's target roles."""

from collections.abc import Mapping
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from asmlab.data.manifest import Batch
from asmlab.engine import ops
from asmlab.engine.tensor import Tensor
from asmlab.exceptions import ConfigurationError
from asmlab.losses.pixelwise import NORMAL_EPS, one_hot
from asmlab.nets.checkpoint import load_network, save_network
from asmlab.nets.network import Network, build_network
from asmlab.nets.spec import NetworkSpec, discriminator_spec, load_template, regularizer_spec
from asmlab.tasks import TaskKind, head_name, input_name, role_channels, role_kind, target_roles
from asmlab.training.config import TrainConfig

TASK_SEPARATOR = "@"
PLAYER_ROLES = ("predictor", "analyzer", "regularizer", "discriminator")


@dataclass
class Players:
    predictor: Network
    analyzer: Network | None = None
    regularizer: Network | None = None
    discriminator: Network | None = None

    def items(self) -> list[tuple[str, Network]]:
        """(role, network) for every instantiated player, in a fixed order."""
        nets = [getattr(self, role) for role in PLAYER_ROLES]
        return [(role, net) for role, net in zip(PLAYER_ROLES, nets) if net is not None]

    def num_parameters(self) -> int:
        return sum(net.num_parameters() for _, net in self.items())

    def copy(self) -> "Players":
        return Players(**{role: net.copy() for role, net in self.items()})


def network_task(net: Network) -> str | None:
    """Task recorded in the network name by fit_predictor / fit_analyzer."""
    _, sep, task = net.spec.name.rpartition(TASK_SEPARATOR)
    return task if sep else None


def fit_predictor(spec: NetworkSpec, task: TaskKind, classes: int) -> NetworkSpec:
    """One gray image input; one head per target role."""
    heads = {head_name(role): c for role, c in role_channels(task, classes).items()}
    fitted = spec.with_inputs({spec.input_names[0]: 1}).with_heads(heads)
    return replace(fitted, name=f"{spec.name}{TASK_SEPARATOR}{task}")


def fit_analyzer(spec: NetworkSpec, task: TaskKind, classes: int) -> NetworkSpec:
    """Inputs per target role.

    A single-input template used for the joint task reads the concatenation of
    all role inputs.

    Raises:
        ConfigurationError: If a multi-input template is used for a single task
    """
    channels = {input_name(role): c for role, c in role_channels(task, classes).items()}
    if set(spec.input_names) == set(channels):
        fitted = spec.with_inputs({name: channels[name] for name in spec.input_names})
    elif len(spec.inputs) == 1:
        (old,) = spec.input_names
        layers = tuple(
            replace(
                layer,
                connections=tuple(
                    n for c in layer.connections for n in (channels if c == old else (c,))
                ),
            )
            for layer in spec.layers
        )
        fitted = replace(spec, layers=layers, inputs=tuple(channels.items()))
    else:
        raise ConfigurationError(
            f"Analyzer template {spec.name} expects inputs {list(spec.input_names)}",
            template=spec.name,
            task=task,
        )
    return replace(fitted, name=f"{spec.name}{TASK_SEPARATOR}{task}")


def build_players(config: TrainConfig, classes: int) -> Players:
    """Instantiate the networks the regime needs, each from its own derived seed."""
    seeds = [int(s) for s in np.random.SeedSequence([config.seed, 0xA5]).generate_state(4)]
    task = config.task
    predictor_spec = load_template(config.predictor_template, config.width_divisor)
    predictor = build_network(fit_predictor(predictor_spec, task, classes), seeds[0])
    players = Players(predictor)
    if not (config.uses_analyzer or config.uses_discriminator):
        return players

    analyzer_spec = fit_analyzer(
        load_template(config.analyzer_template, config.width_divisor), task, classes
    )
    if config.taps is not None:
        analyzer_spec = analyzer_spec.with_taps(tuple(config.taps))
    if config.uses_analyzer:
        players.analyzer = build_network(analyzer_spec, seeds[1])
        reg_tap = analyzer_spec.reg_tap or analyzer_spec.taps[-1]
        heads = {head_name(role): c for role, c in role_channels(task, classes).items()}
        players.regularizer = build_network(
            regularizer_spec(analyzer_spec.layer(reg_tap).channels, heads, config.reg_width),
            seeds[2],
        )
    else:
        target_channels = sum(role_channels(task, classes).values())
        extra = 1 if config.regime == "cgan" else 0
        players.discriminator = build_network(
            discriminator_spec(analyzer_spec, target_channels + extra), seeds[3]
        )
    return players


def target_tensors(task: TaskKind, batch: Batch, classes: int) -> dict[str, Tensor]:
    """Targets by role as constants; segmentation masks become one-hot maps."""
    out = {}
    for role in target_roles(task):
        values = batch.targets[role]
        if role_kind(task, role) == "segmentation":
            values = one_hot(values, classes)
        out[role] = Tensor(values)
    return out


def structure_inputs(task: TaskKind, heads: Mapping[str, Tensor]) -> dict[str, Tensor]:
    """Map raw predictor heads to target space: class probabilities, depth, unit normals."""
    out = {}
    for role in target_roles(task):
        raw = heads[head_name(role)]
        match role_kind(task, role):
            case "segmentation":
                out[role] = ops.softmax(raw, axis=1)
            case "normal":
                out[role] = ops.normalize_channels(raw, NORMAL_EPS)
            case _:
                out[role] = raw
    return out


def raw_heads(task: TaskKind, heads: Mapping[str, Tensor]) -> dict[str, Tensor]:
    return {role: heads[head_name(role)] for role in target_roles(task)}


def analyzer_inputs(values: Mapping[str, Tensor]) -> dict[str, Tensor]:
    return {input_name(role): t for role, t in values.items()}


def critic_input(values: Mapping[str, Tensor], image: Tensor | None = None) -> Tensor:
    """Role tensors (and the image for the conditional critic) stacked on channels."""
    parts = list(values.values())
    if image is not None:
        parts.append(image)
    return parts[0] if len(parts) == 1 else ops.concat(parts, axis=1)


def save_players(players: Players, directory: Path) -> list[Path]:
    paths = []
    for role, net in players.items():
        path = directory / f"{role}.ckpt"
        save_network(net, path)
        paths.append(path)
    return paths


def load_players(directory: Path) -> Players:
    """Load every <role>.ckpt present in directory.

    Raises:
        ConfigurationError: If there is no predictor checkpoint
    """
    nets = {
        role: load_network(directory / f"{role}.ckpt")
        for role in PLAYER_ROLES
        if (directory / f"{role}.ckpt").is_file()
    }
    if "predictor" not in nets:
        raise ConfigurationError(f"No predictor checkpoint in {directory}", path=str(directory))
    return Players(**nets)
