"""Bit-exact PGM (P5, 8-bit) and PFM (Pf/PF, little-endian) codecs.

Masks and gray images travel as PGM; depth maps, normal maps and loss maps as
PFM. In memory a 3-channel float map is C x H x W; on disk PFM stores rows
bottom-up with interleaved channels.
"""

import re
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from asmlab.exceptions import FileError, FormatError

PGM_MAXVAL = 255
_HEADER_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n)*(\S+)")


def _header_tokens(
    data: bytes, count: int, fmt: str, path: str | None
) -> tuple[list[bytes], int]:
    """Read count whitespace-separated tokens; returns them and the offset after the
    single whitespace byte that terminates the last one."""
    tokens: list[bytes] = []
    pos = 0
    for _ in range(count):
        match = _HEADER_TOKEN.match(data, pos)
        if match is None:
            raise FormatError(fmt, "truncated header", path=path)
        tokens.append(match.group(1))
        pos = match.end()
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise FormatError(fmt, "header not terminated by whitespace", path=path)
    return tokens, pos + 1


def _int_token(token: bytes, what: str, fmt: str, path: str | None) -> int:
    try:
        value = int(token)
    except ValueError:
        raise FormatError(fmt, f"{what} is not an integer: {token!r}", path=path)
    if value < 0:
        raise FormatError(fmt, f"{what} is negative", path=path)
    return value


def encode_pgm(mask: NDArray[np.integer] | NDArray[np.uint8]) -> bytes:
    """H x W array of ids in [0, 255] -> P5 bytes."""
    m = np.asarray(mask)
    if m.ndim != 2:
        raise FormatError("pgm", f"expected a 2-D array, got shape {m.shape}")
    if m.size and (m.min() < 0 or m.max() > PGM_MAXVAL):
        raise FormatError("pgm", "values outside [0, 255]")
    h, w = m.shape
    return f"P5\n{w} {h}\n{PGM_MAXVAL}\n".encode("ascii") + m.astype(np.uint8).tobytes()


def decode_pgm(data: bytes, path: str | None = None) -> NDArray[np.uint8]:
    """P5 bytes -> H x W uint8 array.

    Raises:
        FormatError: On a bad magic, maxval other than 255 or payload size mismatch
    """
    if data[:2] != b"P5":
        raise FormatError("pgm", "missing P5 magic", path=path)
    tokens, offset = _header_tokens(data[2:], 3, "pgm", path)
    offset += 2
    width = _int_token(tokens[0], "width", "pgm", path)
    height = _int_token(tokens[1], "height", "pgm", path)
    maxval = _int_token(tokens[2], "maxval", "pgm", path)
    if maxval != PGM_MAXVAL:
        raise FormatError("pgm", f"maxval must be 255, got {maxval}", path=path)
    payload = data[offset:]
    if len(payload) != width * height:
        raise FormatError(
            "pgm", f"payload is {len(payload)} bytes, expected {width * height}", path=path
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()


def encode_pfm(values: NDArray[np.floating]) -> bytes:
    """H x W (Pf) or 3 x H x W (PF) float map -> little-endian PFM bytes."""
    v = np.asarray(values, dtype=np.float64)
    if not np.isfinite(v).all():
        raise FormatError("pfm", "refusing to store non-finite values")
    if v.ndim == 2:
        magic, rows = "Pf", v
    elif v.ndim == 3 and v.shape[0] == 3:
        magic, rows = "PF", np.moveaxis(v, 0, -1)
    else:
        raise FormatError("pfm", f"expected H x W or 3 x H x W, got shape {v.shape}")
    h, w = v.shape[-2:]
    header = f"{magic}\n{w} {h}\n-1.0\n".encode("ascii")
    return header + np.flipud(rows).astype("<f4").tobytes()


def decode_pfm(data: bytes, path: str | None = None) -> NDArray[np.float64]:
    """PFM bytes -> float64 H x W or 3 x H x W, top row first.

    Raises:
        FormatError: On a bad magic, non-negative (big-endian) scale, size mismatch
            or NaN/Inf payload
    """
    magic = data[:2]
    if magic not in (b"Pf", b"PF"):
        raise FormatError("pfm", "missing Pf/PF magic", path=path)
    channels = 1 if magic == b"Pf" else 3
    tokens, offset = _header_tokens(data[2:], 3, "pfm", path)
    offset += 2
    width = _int_token(tokens[0], "width", "pfm", path)
    height = _int_token(tokens[1], "height", "pfm", path)
    try:
        scale = float(tokens[2])
    except ValueError:
        raise FormatError("pfm", f"scale is not a number: {tokens[2]!r}", path=path)
    if scale >= 0:
        raise FormatError("pfm", "big-endian PFM (positive scale) is not supported", path=path)
    expected = width * height * channels * 4
    payload = data[offset:]
    if len(payload) != expected:
        raise FormatError(
            "pfm", f"payload is {len(payload)} bytes, expected {expected}", path=path
        )
    flat = np.frombuffer(payload, dtype="<f4")
    if not np.isfinite(flat).all():
        raise FormatError("pfm", "payload contains NaN or Inf", path=path)
    rows = np.flipud(flat.reshape(height, width, channels)).astype(np.float64)
    if channels == 1:
        return np.ascontiguousarray(rows[:, :, 0])
    return np.ascontiguousarray(np.moveaxis(rows, -1, 0))


def read_bytes(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as e:
        raise FileError(str(path), "read", str(e)) from e


def write_bytes(path: Path, data: bytes) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as e:
        raise FileError(str(path), "write", str(e)) from e


def write_text(path: Path, text: str) -> None:
    write_bytes(path, text.encode("utf-8"))


def read_pgm(path: Path) -> NDArray[np.uint8]:
    return decode_pgm(read_bytes(path), path=str(path))


def write_pgm(path: Path, mask: NDArray[np.integer] | NDArray[np.uint8]) -> None:
    write_bytes(path, encode_pgm(mask))


def read_pfm(path: Path) -> NDArray[np.float64]:
    return decode_pfm(read_bytes(path), path=str(path))


def write_pfm(path: Path, values: NDArray[np.floating]) -> None:
    write_bytes(path, encode_pfm(values))


def image_to_pgm(image: NDArray[np.floating]) -> NDArray[np.uint8]:
    """Quantize a [0, 1] gray image to 8 bits (round half to even)."""
    return np.rint(np.clip(image, 0.0, 1.0) * PGM_MAXVAL).astype(np.uint8)


def pgm_to_image(pixels: NDArray[np.uint8]) -> NDArray[np.float64]:
    return pixels.astype(np.float64) / PGM_MAXVAL
