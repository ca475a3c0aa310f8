"""Encoder-decoder network construction for predictors, analyzers, regularizers and critics."""

from asmlab.nets.checkpoint import (
    deserialize_network,
    load_network,
    save_network,
    serialize_network,
)
from asmlab.nets.network import (
    Network,
    binarize_wta,
    build_network,
    forward_with_taps,
    infer_shapes,
    parameter_shapes,
)
from asmlab.nets.spec import (
    TEMPLATES,
    LayerSpec,
    NetworkRole,
    NetworkSpec,
    discriminator_spec,
    format_spec,
    load_template,
    parse_spec,
    regularizer_spec,
    validate_spec,
)

__all__ = [
    "TEMPLATES",
    "LayerSpec",
    "Network",
    "NetworkRole",
    "NetworkSpec",
    "binarize_wta",
    "build_network",
    "deserialize_network",
    "discriminator_spec",
    "format_spec",
    "forward_with_taps",
    "infer_shapes",
    "load_network",
    "load_template",
    "parameter_shapes",
    "parse_spec",
    "regularizer_spec",
    "save_network",
    "serialize_network",
    "validate_spec",
]
