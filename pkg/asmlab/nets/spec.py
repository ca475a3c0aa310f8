"""Declarative layer-graph descriptions and their tab-separated template format.

A template holds one layer per line::

    name <TAB> connections <TAB> kernel <TAB> channels <TAB> stride <TAB> repeat <TAB> upsample

Lines starting with ``#!`` are directives (``#! input input 1``, ``#! taps conv1,conv2``,
``#! reg_tap conv2``, ``#! role analyzer``, ``#! norm affine``, ``#! global_pool 1``);
other ``#`` lines are comments. Layers whose name starts with ``output`` are heads:
they carry no activation and produce the network's outputs.
"""

from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Literal

from asmlab.exceptions import ConfigurationError, FormatError

NetworkRole = Literal["predictor", "analyzer", "regularizer", "discriminator"]
ROLES: tuple[str, ...] = ("predictor", "analyzer", "regularizer", "discriminator")


@dataclass(frozen=True)
class LayerSpec:
    """One named convolution block."""

    name: str
    connections: tuple[str, ...]
    kernel: int
    channels: int
    stride: int = 1
    repeat: int = 1
    upsample: bool = False

    @property
    def is_head(self) -> bool:
        return self.name.startswith("output")

    def to_line(self) -> str:
        return "\t".join(
            [
                self.name,
                ",".join(self.connections),
                str(self.kernel),
                str(self.channels),
                str(self.stride),
                str(self.repeat),
                "1" if self.upsample else "0",
            ]
        )


@dataclass(frozen=True)
class NetworkSpec:
    """Ordered layer list plus inputs, heads and feature taps."""

    layers: tuple[LayerSpec, ...]
    inputs: tuple[tuple[str, int], ...] = (("input", 1),)
    role: NetworkRole = "predictor"
    taps: tuple[str, ...] = ()
    reg_tap: str | None = None
    norm: bool = False
    global_pool: bool = False
    name: str = "network"
    comments: tuple[str, ...] = field(default=(), compare=False)

    @property
    def heads(self) -> tuple[LayerSpec, ...]:
        return tuple(layer for layer in self.layers if layer.is_head)

    @property
    def layer_names(self) -> tuple[str, ...]:
        return tuple(layer.name for layer in self.layers)

    @property
    def input_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.inputs)

    def layer(self, name: str) -> LayerSpec:
        for layer in self.layers:
            if layer.name == name:
                return layer
        raise ConfigurationError(f"Unknown layer: {name}", layer=name, network=self.name)

    def head_role(self, head: str) -> str:
        """Target role of a head: 'depth'/'normal' for joint heads, else 'target'."""
        suffix = head.removeprefix("output").lstrip("_")
        return suffix or "target"

    def with_head_channels(self, channels: dict[str, int] | int) -> "NetworkSpec":
        """Return a copy with head widths replaced (a single int applies to every head)."""
        layers = []
        for layer in self.layers:
            if layer.is_head:
                width = channels if isinstance(channels, int) else channels.get(layer.name)
                if width is not None:
                    layer = replace(layer, channels=width)
            layers.append(layer)
        return replace(self, layers=tuple(layers))

    def with_heads(self, heads: dict[str, int]) -> "NetworkSpec":
        """Replace all heads by the given ones, each wired like the first existing head."""
        template = self.heads[0]
        body = tuple(layer for layer in self.layers if not layer.is_head)
        new_heads = tuple(
            replace(template, name=name, channels=channels) for name, channels in heads.items()
        )
        return replace(self, layers=body + new_heads)

    def with_inputs(self, inputs: dict[str, int]) -> "NetworkSpec":
        return replace(self, inputs=tuple(inputs.items()))

    def with_taps(self, taps: tuple[str, ...], reg_tap: str | None = None) -> "NetworkSpec":
        return replace(self, taps=taps, reg_tap=reg_tap if reg_tap is not None else self.reg_tap)

    def scaled(self, divisor: int) -> "NetworkSpec":
        """Divide every non-head width by divisor (minimum 1), keeping topology."""
        if divisor < 1:
            raise ConfigurationError("width divisor must be >= 1", divisor=divisor)
        if divisor == 1:
            return self
        layers = tuple(
            layer if layer.is_head else replace(layer, channels=max(1, layer.channels // divisor))
            for layer in self.layers
        )
        return replace(self, layers=layers)


def validate_spec(spec: NetworkSpec) -> None:
    """Check connection order, stride/upsample placement, heads and taps.

    Raises:
        ConfigurationError: Naming the offending layer
    """
    known = set(spec.input_names)
    if not spec.layers:
        raise ConfigurationError("Network has no layers", network=spec.name)
    for layer in spec.layers:
        if layer.name in known:
            raise ConfigurationError(f"Duplicate layer name: {layer.name}", layer=layer.name)
        if not layer.connections:
            raise ConfigurationError(f"Layer {layer.name} has no connections", layer=layer.name)
        for source in layer.connections:
            if source not in known:
                raise ConfigurationError(
                    f"Layer {layer.name} connects to undeclared {source}",
                    layer=layer.name,
                    connection=source,
                )
        if layer.kernel < 1 or layer.kernel % 2 == 0:
            raise ConfigurationError(
                f"Layer {layer.name} needs an odd kernel", layer=layer.name, kernel=layer.kernel
            )
        if layer.channels < 1 or layer.repeat < 1 or layer.stride < 1:
            raise ConfigurationError(
                f"Layer {layer.name} has non-positive channels/repeat/stride", layer=layer.name
            )
        if layer.upsample and layer.stride != 1:
            raise ConfigurationError(
                f"Decoder layer {layer.name} must use stride 1", layer=layer.name
            )
        if layer.is_head and layer.stride != 1:
            raise ConfigurationError(f"Head {layer.name} must use stride 1", layer=layer.name)
        known.add(layer.name)

    if not spec.heads:
        raise ConfigurationError("Network declares no output head", network=spec.name)
    if spec.role == "analyzer" and not spec.taps:
        raise ConfigurationError("Analyzer needs a nonempty tap set", network=spec.name)
    layer_names = set(spec.layer_names)
    for tap in spec.taps:
        if tap not in layer_names:
            raise ConfigurationError(f"Tap {tap} is not a declared layer", tap=tap)
    if spec.reg_tap is not None and spec.reg_tap not in layer_names:
        raise ConfigurationError(
            f"Regularizer tap {spec.reg_tap} is not a declared layer", tap=spec.reg_tap
        )


def format_spec(spec: NetworkSpec) -> str:
    """Render spec as template text; parse_spec(format_spec(s)) == s."""
    lines = [f"#! name {spec.name}", f"#! role {spec.role}"]
    for name, channels in spec.inputs:
        lines.append(f"#! input {name} {channels}")
    if spec.taps:
        lines.append(f"#! taps {','.join(spec.taps)}")
    if spec.reg_tap:
        lines.append(f"#! reg_tap {spec.reg_tap}")
    if spec.norm:
        lines.append("#! norm affine")
    if spec.global_pool:
        lines.append("#! global_pool 1")
    lines.extend(layer.to_line() for layer in spec.layers)
    return "\n".join(lines) + "\n"


def _parse_int(value: str, column: str, line_no: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise FormatError("network template", f"line {line_no}: {column} is not an int: {value!r}")


def parse_spec(text: str, name: str = "network") -> NetworkSpec:
    """Parse template text into a NetworkSpec.

    Raises:
        FormatError: On malformed lines or directives
    """
    layers: list[LayerSpec] = []
    inputs: list[tuple[str, int]] = []
    comments: list[str] = []
    taps: tuple[str, ...] = ()
    reg_tap: str | None = None
    role = "predictor"
    norm = False
    global_pool = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if line.startswith("#!"):
            parts = line[2:].split()
            if not parts:
                raise FormatError("network template", f"line {line_no}: empty directive")
            key, args = parts[0], parts[1:]
            match key:
                case "name" if len(args) == 1:
                    name = args[0]
                case "role" if len(args) == 1 and args[0] in ROLES:
                    role = args[0]
                case "input" if len(args) == 2:
                    inputs.append((args[0], _parse_int(args[1], "input channels", line_no)))
                case "taps" if len(args) == 1:
                    taps = tuple(t for t in args[0].split(",") if t)
                case "reg_tap" if len(args) == 1:
                    reg_tap = args[0]
                case "norm" if args == ["affine"]:
                    norm = True
                case "global_pool" if len(args) == 1:
                    global_pool = args[0] == "1"
                case _:
                    raise FormatError(
                        "network template", f"line {line_no}: bad directive {line!r}"
                    )
            continue
        if line.startswith("#"):
            comments.append(line[1:].strip())
            continue
        cols = line.split("\t")
        if len(cols) != 7:
            raise FormatError(
                "network template", f"line {line_no}: expected 7 tab-separated columns"
            )
        if cols[6] not in ("0", "1"):
            raise FormatError("network template", f"line {line_no}: upsample must be 0 or 1")
        layers.append(
            LayerSpec(
                name=cols[0],
                connections=tuple(c.strip() for c in cols[1].split(",") if c.strip()),
                kernel=_parse_int(cols[2], "kernel", line_no),
                channels=_parse_int(cols[3], "channels", line_no),
                stride=_parse_int(cols[4], "stride", line_no),
                repeat=_parse_int(cols[5], "repeat", line_no),
                upsample=cols[6] == "1",
            )
        )

    return NetworkSpec(
        layers=tuple(layers),
        inputs=tuple(inputs) or (("input", 1),),
        role=role,  # type: ignore[arg-type]
        taps=taps,
        reg_tap=reg_tap,
        norm=norm,
        global_pool=global_pool,
        name=name,
        comments=tuple(comments),
    )


TEMPLATES: tuple[str, ...] = (
    "figure_ground_analyzer",
    "semantic_analyzer",
    "geometry_analyzer",
    "joint_geometry_analyzer",
    "geometry_predictor",
    "desk_predictor",
    "desk_analyzer",
)


def load_template(name: str, width_divisor: int = 1) -> NetworkSpec:
    """Load a shipped template, optionally shrinking non-head widths.

    Raises:
        ConfigurationError: If the template does not exist
    """
    if name not in TEMPLATES:
        raise ConfigurationError(
            f"Unknown network template: {name}", template=name, available=list(TEMPLATES)
        )
    text = resources.files("asmlab.nets").joinpath(f"templates/{name}.tsv").read_text("utf-8")
    spec = parse_spec(text, name=name)
    validate_spec(spec)
    return spec.scaled(width_divisor)


def regularizer_spec(
    in_channels: int,
    heads: dict[str, int],
    width: int = 16,
) -> NetworkSpec:
    """Decoder R mapping analyzer features A_t(y) back to a target-shaped map."""
    layers = [
        LayerSpec("rec1", ("input",), 3, width),
        LayerSpec("rec2", ("rec1",), 3, width),
    ]
    layers.extend(
        LayerSpec(head, ("rec2",), 1, channels, upsample=True)
        for head, channels in heads.items()
    )
    spec = NetworkSpec(
        layers=tuple(layers),
        inputs=(("input", in_channels),),
        role="regularizer",
        name="regularizer",
    )
    validate_spec(spec)
    return spec


def discriminator_spec(analyzer: NetworkSpec, in_channels: int) -> NetworkSpec:
    """Analyzer encoder (layers before the first decoder layer) + global pool + 1-logit head.

    The encoder is rewired to a single input of in_channels (target channels, plus the
    image channels for the conditional variant).
    """
    encoder: list[LayerSpec] = []
    input_names = set(analyzer.input_names)
    for layer in analyzer.layers:
        if layer.upsample or layer.is_head:
            break
        rewired = tuple("input" if c in input_names else c for c in layer.connections)
        encoder.append(replace(layer, connections=tuple(dict.fromkeys(rewired))))
    if not encoder:
        raise ConfigurationError("Analyzer has no encoder layers", network=analyzer.name)
    head = LayerSpec("output", (encoder[-1].name,), 1, 1)
    spec = NetworkSpec(
        layers=(*encoder, head),
        inputs=(("input", in_channels),),
        role="discriminator",
        global_pool=True,
        norm=analyzer.norm,
        name="discriminator",
    )
    validate_spec(spec)
    return spec
