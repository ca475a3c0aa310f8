"""Gradient-based update rules, the poly learning-rate schedule and gradient capping."""

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from asmlab.engine.tensor import Array, Tensor
from asmlab.exceptions import ConfigurationError, UsageError

OptimizerKind = Literal["sgd-momentum", "adam"]


@dataclass
class OptimizerState:
    """Hyperparameters and per-parameter buffers of one update rule.

    Buffers are allocated on the first step and keep the order of the parameter
    sequence passed to optimizer_step; later steps must pass the same sequence.
    """

    kind: OptimizerKind
    base_lr: float
    momentum: float = 0.9
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    buffers: list[dict[str, Array]] = field(default_factory=list)

    def __post_init__(self) -> None:
        """Validate configuration."""
        if self.kind not in ("sgd-momentum", "adam"):
            raise ConfigurationError(f"Unknown optimizer kind: {self.kind}", kind=self.kind)
        if self.base_lr < 0:
            raise ConfigurationError("base_lr must be >= 0", base_lr=self.base_lr)
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigurationError("momentum must be in [0, 1)", momentum=self.momentum)
        if self.weight_decay < 0:
            raise ConfigurationError("weight_decay must be >= 0")


def _init_buffers(state: OptimizerState, params: Sequence[Tensor]) -> None:
    if state.kind == "adam":
        state.buffers = [
            {"m": np.zeros_like(p.values), "v": np.zeros_like(p.values)} for p in params
        ]
    else:
        state.buffers = [{"velocity": np.zeros_like(p.values)} for p in params]


def optimizer_step(state: OptimizerState, params: Sequence[Tensor], lr: float) -> None:
    """Apply one update in place and clear the gradients.

    Weight decay is decoupled: p <- p * (1 - lr * weight_decay) before the
    gradient-driven update.

    Raises:
        UsageError: If any parameter has no gradient or the parameter set changed
    """
    missing = [p.name or f"#{i}" for i, p in enumerate(params) if p.grad is None]
    if missing:
        raise UsageError("Parameters without gradients", params=missing[:8])

    if not state.buffers:
        _init_buffers(state, params)
    if len(state.buffers) != len(params) or any(
        next(iter(buf.values())).shape != p.values.shape
        for buf, p in zip(state.buffers, params)
    ):
        raise UsageError("Optimizer buffers do not match the parameter set")

    state.step_count += 1
    t = state.step_count
    for p, buf in zip(params, state.buffers):
        grad = p.grad
        assert grad is not None
        if state.weight_decay:
            p.values *= 1.0 - lr * state.weight_decay
        if state.kind == "adam":
            buf["m"] = state.beta1 * buf["m"] + (1.0 - state.beta1) * grad
            buf["v"] = state.beta2 * buf["v"] + (1.0 - state.beta2) * grad * grad
            m_hat = buf["m"] / (1.0 - state.beta1**t)
            v_hat = buf["v"] / (1.0 - state.beta2**t)
            p.values -= lr * m_hat / (np.sqrt(v_hat) + state.eps)
        else:
            buf["velocity"] = state.momentum * buf["velocity"] + grad
            p.values -= lr * buf["velocity"]
        p.grad = None


def poly_lr(base_lr: float, iteration: int, max_iter: int, power: float = 0.9) -> float:
    """base_lr * (1 - iteration / max_iter) ** power.

    Raises:
        UsageError: If iteration is outside [0, max_iter] or max_iter <= 0
    """
    if max_iter <= 0:
        raise UsageError("max_iter must be > 0", max_iter=max_iter)
    if iteration < 0 or iteration > max_iter:
        raise UsageError(
            "iteration must lie in [0, max_iter]", iteration=iteration, max_iter=max_iter
        )
    return float(base_lr * (1.0 - iteration / max_iter) ** power)


def global_grad_norm(params: Sequence[Tensor]) -> float:
    total = 0.0
    for p in params:
        if p.grad is not None:
            total += float(np.dot(p.grad.reshape(-1), p.grad.reshape(-1)))
    return float(np.sqrt(total))


def clip_gradients(params: Sequence[Tensor], max_norm: float) -> float:
    """Rescale all gradients so their global L2 norm is at most max_norm.

    Returns:
        The global norm before clipping
    """
    if max_norm <= 0:
        raise UsageError("max_norm must be > 0", max_norm=max_norm)
    norm = global_grad_norm(params)
    if norm > max_norm:
        factor = max_norm / norm
        for p in params:
            if p.grad is not None:
                p.grad *= factor
    return norm
