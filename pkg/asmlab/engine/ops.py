"""Differentiable primitives over NCHW float64 tensors.

Binary elementwise ops require identical shapes; broadcasting is limited to the
per-channel parameters of conv2d and channel_affine.
"""

from collections.abc import Sequence
from functools import lru_cache
from typing import Literal

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from asmlab.engine.tensor import Array, Tensor, record
from asmlab.exceptions import ConfigurationError, UsageError

PointwiseKind = Literal[
    "relu", "sigmoid", "softmax", "log", "concat", "add", "scale"
]


def _require_same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ConfigurationError(
            f"{op}: operand shapes differ", op=op, left=a.shape, right=b.shape
        )


def _require_4d(op: str, x: Tensor) -> None:
    if x.values.ndim != 4:
        raise ConfigurationError(f"{op} expects an NCHW tensor", op=op, shape=x.shape)


def add(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape("add", a, b)
    return record("add", (a, b), a.values + b.values, lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape("sub", a, b)
    return record("sub", (a, b), a.values - b.values, lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape("mul", a, b)
    av, bv = a.values, b.values
    return record("mul", (a, b), av * bv, lambda g: (g * bv, g * av))


def scale(a: Tensor, factor: float) -> Tensor:
    return record("scale", (a,), a.values * factor, lambda g: (g * factor,))


def square(a: Tensor) -> Tensor:
    av = a.values
    return record("square", (a,), av * av, lambda g: (2.0 * g * av,))


def sum(a: Tensor) -> Tensor:
    shape = a.shape
    return record(
        "sum",
        (a,),
        np.array(a.values.sum()),
        lambda g: (np.full(shape, float(g)),),
    )


def mean(a: Tensor) -> Tensor:
    shape, n = a.shape, a.size
    return record(
        "mean",
        (a,),
        np.array(a.values.mean()),
        lambda g: (np.full(shape, float(g) / n),),
    )


def relu(a: Tensor) -> Tensor:
    mask = a.values > 0
    return record("relu", (a,), np.where(mask, a.values, 0.0), lambda g: (g * mask,))


def sigmoid(a: Tensor) -> Tensor:
    s = expit(a.values)
    return record("sigmoid", (a,), s, lambda g: (g * s * (1.0 - s),))


def softplus(a: Tensor) -> Tensor:
    x = a.values
    return record("softplus", (a,), np.logaddexp(0.0, x), lambda g: (g * expit(x),))


def log(a: Tensor, floor: float = 0.0) -> Tensor:
    """Natural log; with floor > 0 values below floor are clamped (zero gradient there)."""
    x = a.values
    if floor > 0.0:
        live = x > floor
        clamped = np.where(live, x, floor)
        return record("log", (a,), np.log(clamped), lambda g: (g * live / clamped,))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(x)
    return record("log", (a,), out, lambda g: (g / x,))


def softmax(a: Tensor, axis: int = 1) -> Tensor:
    x = a.values
    e = np.exp(x - x.max(axis=axis, keepdims=True))
    s = e / e.sum(axis=axis, keepdims=True)

    def backward(g: Array) -> tuple[Array]:
        return (s * (g - (g * s).sum(axis=axis, keepdims=True)),)

    return record("softmax", (a,), s, backward)


def log_softmax(a: Tensor, axis: int = 1) -> Tensor:
    x = a.values
    shifted = x - x.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse
    s = np.exp(out)

    def backward(g: Array) -> tuple[Array]:
        return (g - s * g.sum(axis=axis, keepdims=True),)

    return record("log_softmax", (a,), out, backward)


def concat(tensors: Sequence[Tensor], axis: int = 1) -> Tensor:
    """Concatenate along the channel axis, preserving operand order."""
    if not tensors:
        raise ConfigurationError("concat needs at least one operand")
    ref = tensors[0].shape
    for t in tensors[1:]:
        if len(t.shape) != len(ref) or any(
            d1 != d2 for i, (d1, d2) in enumerate(zip(t.shape, ref)) if i != axis
        ):
            raise ConfigurationError(
                "concat: operands differ outside the channel axis",
                op="concat",
                shapes=[x.shape for x in tensors],
            )
    if len(tensors) == 1:
        return tensors[0]
    splits = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g: Array) -> tuple[Array, ...]:
        return tuple(np.split(g, splits, axis=axis))

    return record(
        "concat",
        tuple(tensors),
        np.concatenate([t.values for t in tensors], axis=axis),
        backward,
    )


def normalize_channels(a: Tensor, eps: float = 1e-8) -> Tensor:
    """Scale each pixel's channel vector to unit length; norms below eps use eps."""
    x = a.values
    norm = np.sqrt((x * x).sum(axis=1, keepdims=True))
    denom = np.maximum(norm, eps)
    u = x / denom
    live = norm > eps

    def backward(g: Array) -> tuple[Array]:
        projected = (g - u * (g * u).sum(axis=1, keepdims=True)) / denom
        return (np.where(live, projected, g / denom),)

    return record("normalize_channels", (a,), u, backward)


def global_avg_pool(a: Tensor) -> Tensor:
    _require_4d("global_avg_pool", a)
    n, c, h, w = a.shape
    return record(
        "global_avg_pool",
        (a,),
        a.values.mean(axis=(2, 3), keepdims=True),
        lambda g: (np.broadcast_to(g / (h * w), (n, c, h, w)).copy(),),
    )


def channel_affine(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Per-sample, per-channel standardization over H, W followed by a learned affine."""
    _require_4d("channel_affine", x)
    v = x.values
    m = v.shape[2] * v.shape[3]
    mu = v.mean(axis=(2, 3), keepdims=True)
    inv_std = 1.0 / np.sqrt(v.var(axis=(2, 3), keepdims=True) + eps)
    xhat = (v - mu) * inv_std
    gv = gamma.values[None, :, None, None]
    out = gv * xhat + beta.values[None, :, None, None]

    def backward(g: Array) -> tuple[Array, Array, Array]:
        dxhat = g * gv
        dx = (
            inv_std
            / m
            * (
                m * dxhat
                - dxhat.sum(axis=(2, 3), keepdims=True)
                - xhat * (dxhat * xhat).sum(axis=(2, 3), keepdims=True)
            )
        )
        return dx, (g * xhat).sum(axis=(0, 2, 3)), g.sum(axis=(0, 2, 3))

    return record("channel_affine", (x, gamma, beta), out, backward)


def conv2d(
    x: Tensor,
    weights: Tensor,
    bias: Tensor,
    stride: int = 1,
    padding: Literal["same"] | int = "same",
) -> Tensor:
    """2-D cross-correlation of an NCHW input with OIKK weights.

    With "same" padding (K // 2 on every side) the output extent is ceil(H / stride).

    Raises:
        ConfigurationError: On channel/kernel/bias mismatch, even kernel or bad stride
    """
    _require_4d("conv2d", x)
    if weights.values.ndim != 4:
        raise ConfigurationError("conv2d weights must be OIKK", shape=weights.shape)
    n, c_in, h, w = x.shape
    c_out, c_w, k, k2 = weights.shape
    if c_w != c_in:
        raise ConfigurationError(
            "conv2d: input channels do not match weights",
            op="conv2d",
            input_channels=c_in,
            weight_channels=c_w,
        )
    if k != k2 or k % 2 == 0:
        raise ConfigurationError("conv2d: kernel must be square and odd", kernel=(k, k2))
    if bias.shape != (c_out,):
        raise ConfigurationError(
            "conv2d: bias must have one value per output channel",
            bias=bias.shape,
            out_channels=c_out,
        )
    if stride < 1:
        raise ConfigurationError("conv2d: stride must be >= 1", stride=stride)
    pad = k // 2 if padding == "same" else int(padding)
    if pad < 0:
        raise ConfigurationError("conv2d: padding must be >= 0", padding=pad)

    xp = np.pad(x.values, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x.values
    cols = sliding_window_view(xp, (k, k), axis=(2, 3))[:, :, ::stride, ::stride]
    h_out, w_out = cols.shape[2], cols.shape[3]
    wv = weights.values
    out = np.tensordot(cols, wv, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    out = out + bias.values[None, :, None, None]

    def backward(g: Array) -> tuple[Array, Array, Array]:
        dw = np.tensordot(g, cols, axes=([0, 2, 3], [0, 2, 3]))
        db = g.sum(axis=(0, 2, 3))
        dcols = np.tensordot(g, wv, axes=([1], [0]))  # N, Ho, Wo, I, K, K
        dxp = np.zeros_like(xp)
        for ki in range(k):
            for kj in range(k):
                dxp[
                    :,
                    :,
                    ki : ki + stride * (h_out - 1) + 1 : stride,
                    kj : kj + stride * (w_out - 1) + 1 : stride,
                ] += dcols[:, :, :, :, ki, kj].transpose(0, 3, 1, 2)
        dx = dxp[:, :, pad : pad + h, pad : pad + w] if pad else dxp
        return dx, dw, db

    return record("conv2d", (x, weights, bias), np.ascontiguousarray(out), backward)


@lru_cache(maxsize=64)
def interpolation_matrix(n_in: int, factor: int) -> Array:
    """Row o holds the half-pixel-center bilinear weights of output sample o."""
    n_out = n_in * factor
    src = (np.arange(n_out) + 0.5) / factor - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    i0 = np.floor(src).astype(np.int64)
    i1 = np.minimum(i0 + 1, n_in - 1)
    t = src - i0
    m = np.zeros((n_out, n_in))
    rows = np.arange(n_out)
    np.add.at(m, (rows, i0), 1.0 - t)
    np.add.at(m, (rows, i1), t)
    m.setflags(write=False)
    return m


def bilinear_upsample(x: Tensor, factor: int) -> Tensor:
    """Bilinear resize by an integer factor with half-pixel-center sampling.

    Raises:
        ConfigurationError: If factor < 2
    """
    _require_4d("bilinear_upsample", x)
    if factor < 2:
        raise ConfigurationError("bilinear_upsample: factor must be >= 2", factor=factor)
    _, _, h, w = x.shape
    uh = interpolation_matrix(h, factor)
    uw = interpolation_matrix(w, factor)
    out = np.einsum("ph,nchw,qw->ncpq", uh, x.values, uw, optimize=True)

    def backward(g: Array) -> tuple[Array]:
        return (np.einsum("ph,ncpq,qw->nchw", uh, g, uw, optimize=True),)

    return record("bilinear_upsample", (x,), out, backward)


def pointwise(kind: PointwiseKind, *operands: Tensor, factor: float = 1.0) -> Tensor:
    """Dispatch one of the elementwise / channel-wise primitives by name.

    Raises:
        UsageError: On unknown kind or wrong operand count
    """
    if kind == "concat":
        return concat(operands)
    arity = 2 if kind == "add" else 1
    if len(operands) != arity:
        raise UsageError(
            f"pointwise {kind} expects {arity} operand(s)", kind=kind, given=len(operands)
        )
    match kind:
        case "relu":
            return relu(operands[0])
        case "sigmoid":
            return sigmoid(operands[0])
        case "softmax":
            return softmax(operands[0], axis=1)
        case "log":
            return log(operands[0])
        case "add":
            return add(operands[0], operands[1])
        case "scale":
            return scale(operands[0], factor)
    raise UsageError(f"Unknown pointwise kind: {kind}", kind=kind)

