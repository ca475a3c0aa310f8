"""Binary network checkpoints.

Layout::

    b"ASMCKPT1" | u64 little-endian spec length | spec text (UTF-8) | <f8 parameter blob

The blob holds every parameter flattened in declaration order; shapes are
re-derived from the embedded spec on load.
"""

import struct
from pathlib import Path

import numpy as np

from asmlab.data.imageio import read_bytes, write_bytes
from asmlab.engine.tensor import Tensor
from asmlab.exceptions import ConfigurationError, FormatError
from asmlab.nets.network import Network, parameter_shapes
from asmlab.nets.spec import format_spec, parse_spec, validate_spec

MAGIC = b"ASMCKPT1"
_LENGTH = struct.Struct("<Q")


def serialize_network(net: Network) -> bytes:
    """Encode spec and parameters into checkpoint bytes."""
    spec_bytes = format_spec(net.spec).encode("utf-8")
    expected = parameter_shapes(net.spec)
    if list(expected) != list(net.params):
        raise ConfigurationError(
            "Network parameters do not match its spec", network=net.spec.name
        )
    blobs = [net.params[name].values.astype("<f8").tobytes() for name in expected]
    return b"".join([MAGIC, _LENGTH.pack(len(spec_bytes)), spec_bytes, *blobs])


def deserialize_network(data: bytes, source: str | None = None) -> Network:
    """Decode checkpoint bytes; nothing is returned unless the whole payload parses.

    Raises:
        FormatError: On wrong magic or version, truncation or trailing bytes
    """
    if len(data) < len(MAGIC) + _LENGTH.size:
        raise FormatError("checkpoint", "truncated header", path=source)
    if data[: len(MAGIC)] != MAGIC:
        if data[:7] == MAGIC[:7]:
            raise FormatError(
                "checkpoint", f"unsupported version {data[7:8]!r}", path=source
            )
        raise FormatError("checkpoint", "bad magic bytes", path=source)

    offset = len(MAGIC)
    (spec_len,) = _LENGTH.unpack_from(data, offset)
    offset += _LENGTH.size
    if offset + spec_len > len(data):
        raise FormatError("checkpoint", "truncated spec text", path=source)
    try:
        text = data[offset : offset + spec_len].decode("utf-8")
    except UnicodeDecodeError as e:
        raise FormatError("checkpoint", f"spec text is not UTF-8: {e}", path=source) from e
    offset += spec_len

    spec = parse_spec(text)
    try:
        validate_spec(spec)
    except ConfigurationError as e:
        raise FormatError("checkpoint", f"embedded spec is invalid: {e.message}", path=source)

    shapes = parameter_shapes(spec)
    total = sum(int(np.prod(shape)) for shape in shapes.values())
    payload = len(data) - offset
    if payload < total * 8:
        raise FormatError(
            "checkpoint",
            f"truncated parameter blob ({payload} of {total * 8} bytes)",
            path=source,
        )
    if payload > total * 8:
        raise FormatError("checkpoint", f"{payload - total * 8} trailing bytes", path=source)

    flat = np.frombuffer(data, dtype="<f8", count=total, offset=offset).astype(np.float64)
    params: dict[str, Tensor] = {}
    start = 0
    for name, shape in shapes.items():
        size = int(np.prod(shape))
        params[name] = Tensor(
            flat[start : start + size].reshape(shape), requires_grad=True, name=name
        )
        start += size
    return Network(spec, params)


def save_network(net: Network, path: Path) -> Path:
    """Write a checkpoint file, creating parent directories.

    Raises:
        FileError: If the file cannot be written
    """
    write_bytes(path, serialize_network(net))
    return path


def load_network(path: Path) -> Network:
    """Read a checkpoint file.

    Raises:
        FileError: If the file cannot be read
        FormatError: If its contents do not parse
    """
    return deserialize_network(read_bytes(path), source=str(path))
