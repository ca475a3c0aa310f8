"""Instantiated networks: parameters, forward evaluation with feature taps, WTA."""

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np

from asmlab.engine import ops
from asmlab.engine.tensor import Tensor, layer_scope
from asmlab.exceptions import ConfigurationError, UsageError
from asmlab.logging_config import get_logger
from asmlab.nets.spec import LayerSpec, NetworkRole, NetworkSpec, validate_spec

logger = get_logger(__name__)

Shape = tuple[int, int, int]  # C, H, W


@dataclass
class Network:
    """A NetworkSpec with its parameter tensors θ in declaration order."""

    spec: NetworkSpec
    params: dict[str, Tensor] = field(default_factory=dict)

    @property
    def role(self) -> NetworkRole:
        return self.spec.role

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def num_parameters(self) -> int:
        return sum(p.size for p in self.params.values())

    def copy(self) -> "Network":
        """Deep copy of the parameters (gradients dropped)."""
        return Network(
            self.spec,
            {
                name: Tensor(p.values.copy(), requires_grad=True, name=name)
                for name, p in self.params.items()
            },
        )


def _resize_factor(layer: LayerSpec, src: tuple[int, int], target: tuple[int, int]) -> int:
    if target[0] % src[0] or target[1] % src[1] or target[0] // src[0] != target[1] // src[1]:
        raise ConfigurationError(
            f"Layer {layer.name} cannot upsample {src} to {target} by an integer factor",
            layer=layer.name,
            source=src,
            target=target,
        )
    return target[0] // src[0]


def _upsample_target(
    layer: LayerSpec,
    sources: list[tuple[int, int]],
    out_size: tuple[int, int],
) -> tuple[int, int]:
    if len(sources) > 1:
        return sources[1]
    if layer.is_head:
        return out_size
    return sources[0][0] * 2, sources[0][1] * 2


def infer_shapes(spec: NetworkSpec, size: tuple[int, int]) -> dict[str, Shape]:
    """Symbolic shape inference for an input of spatial extent size.

    Raises:
        ConfigurationError: On concat extent mismatch or non-integer upsampling
    """
    shapes: dict[str, Shape] = {name: (c, size[0], size[1]) for name, c in spec.inputs}
    for layer in spec.layers:
        srcs = [shapes[c] for c in layer.connections]
        hw = [(s[1], s[2]) for s in srcs]
        if layer.upsample:
            target = _upsample_target(layer, hw, size)
            factor = _resize_factor(layer, hw[0], target)
            hw[0] = (hw[0][0] * factor, hw[0][1] * factor)
        if len(set(hw)) != 1:
            raise ConfigurationError(
                f"Layer {layer.name} concatenates inputs of different extent",
                layer=layer.name,
                extents=hw,
            )
        h, w = hw[0]
        if spec.global_pool and layer.is_head:
            h, w = 1, 1
        h = -(-h // layer.stride)
        w = -(-w // layer.stride)
        shapes[layer.name] = (layer.channels, h, w)
    return shapes


def parameter_shapes(spec: NetworkSpec) -> dict[str, tuple[int, ...]]:
    """Parameter names and shapes in declaration order, derived from the NetworkSpec alone."""
    channels = dict(spec.inputs)
    shapes: dict[str, tuple[int, ...]] = {}
    for layer in spec.layers:
        c_in = sum(channels[c] for c in layer.connections)
        for j in range(layer.repeat):
            prefix = f"{layer.name}.{j}"
            shapes[f"{prefix}.weight"] = (layer.channels, c_in, layer.kernel, layer.kernel)
            shapes[f"{prefix}.bias"] = (layer.channels,)
            if spec.norm and not layer.is_head:
                shapes[f"{prefix}.gamma"] = (layer.channels,)
                shapes[f"{prefix}.beta"] = (layer.channels,)
            c_in = layer.channels
        channels[layer.name] = layer.channels
    return shapes


def build_network(spec: NetworkSpec, seed: int, probe_size: int = 64) -> Network:
    """Instantiate parameters deterministically from seed.

    Conv weights are drawn from N(0, 2 / fan_in) in declaration order; biases are
    zero; affine-normalization scales start at 1 and shifts at 0.

    Raises:
        ConfigurationError: On an invalid spec or failed shape inference
    """
    validate_spec(spec)
    infer_shapes(spec, (probe_size, probe_size))
    rng = np.random.default_rng(seed)
    params: dict[str, Tensor] = {}
    for name, shape in parameter_shapes(spec).items():
        kind = name.rsplit(".", 1)[1]
        if kind == "weight":
            fan_in = int(np.prod(shape[1:]))
            values = rng.normal(0.0, np.sqrt(2.0 / fan_in), shape)
        elif kind == "gamma":
            values = np.ones(shape)
        else:
            values = np.zeros(shape)
        params[name] = Tensor(values, requires_grad=True, name=name)
    net = Network(spec, params)
    logger.debug(
        "network_built",
        network=spec.name,
        role=spec.role,
        layers=len(spec.layers),
        parameters=net.num_parameters(),
    )
    return net


def forward_with_taps(
    net: Network,
    inputs: Tensor | Mapping[str, Tensor],
    taps: Iterable[str] = (),
    out_size: tuple[int, int] | None = None,
) -> tuple[dict[str, Tensor], dict[str, Tensor]]:
    """Evaluate the network, returning head outputs and the requested activations.

    Taps are post-activation (heads are raw). Everything is recorded on the active
    tape, so gradients reach both the parameters and the inputs.

    Args:
        net: Network to evaluate
        inputs: Tensor for single-input networks or a mapping by input name
        taps: Layer names whose activations to return
        out_size: Spatial extent that upsampling heads resize to (default: input extent)

    Raises:
        UsageError: On unknown tap or missing input
    """
    spec = net.spec
    tap_set = list(dict.fromkeys(taps))
    declared = set(spec.layer_names)
    unknown = [t for t in tap_set if t not in declared]
    if unknown:
        raise UsageError(f"Unknown tap(s): {', '.join(unknown)}", taps=unknown, network=spec.name)

    if isinstance(inputs, Tensor):
        if len(spec.inputs) != 1:
            raise UsageError("Network has several inputs; pass a mapping", inputs=spec.input_names)
        values: dict[str, Tensor] = {spec.inputs[0][0]: inputs}
    else:
        missing = [n for n in spec.input_names if n not in inputs]
        if missing:
            raise UsageError(f"Missing network input(s): {', '.join(missing)}", missing=missing)
        values = {n: inputs[n] for n in spec.input_names}
    for name, channels in spec.inputs:
        if values[name].values.ndim != 4 or values[name].shape[1] != channels:
            raise ConfigurationError(
                f"Input {name} must be N x {channels} x H x W",
                input=name,
                shape=values[name].shape,
            )
    first = values[spec.inputs[0][0]]
    size = out_size or (first.shape[2], first.shape[3])

    heads: dict[str, Tensor] = {}
    for layer in spec.layers:
        with layer_scope(layer.name):
            sources = [values[c] for c in layer.connections]
            if layer.upsample:
                hw = [(s.shape[2], s.shape[3]) for s in sources]
                factor = _resize_factor(layer, hw[0], _upsample_target(layer, hw, size))
                if factor > 1:
                    sources[0] = ops.bilinear_upsample(sources[0], factor)
            h = ops.concat(sources)
            if spec.global_pool and layer.is_head:
                h = ops.global_avg_pool(h)
            for j in range(layer.repeat):
                prefix = f"{layer.name}.{j}"
                h = ops.conv2d(
                    h,
                    net.params[f"{prefix}.weight"],
                    net.params[f"{prefix}.bias"],
                    stride=layer.stride if j == 0 else 1,
                )
                if layer.is_head:
                    continue
                if spec.norm:
                    h = ops.channel_affine(
                        h, net.params[f"{prefix}.gamma"], net.params[f"{prefix}.beta"]
                    )
                h = ops.relu(h)
        values[layer.name] = h
        if layer.is_head:
            heads[layer.name] = h

    return heads, {t: values[t] for t in tap_set}


def binarize_wta(prediction: Tensor) -> Tensor:
    """One-hot winner-take-all over channels; ties go to the lowest channel index.

    The result is a constant (no gradient path back to prediction).

    Raises:
        UsageError: For fewer than two channels (regression outputs)
    """
    if prediction.values.ndim != 4 or prediction.shape[1] < 2:
        raise UsageError(
            "binarize_wta needs an N x C x H x W class map with C >= 2",
            shape=prediction.shape,
        )
    winners = np.argmax(prediction.values, axis=1)
    one_hot = np.zeros_like(prediction.values)
    np.put_along_axis(one_hot, winners[:, None, :, :], 1.0, axis=1)
    return Tensor(one_hot, requires_grad=False, name="wta")
