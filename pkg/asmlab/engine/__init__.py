"""Tensor engine: float64 arrays, reverse-mode tape, optimizers and schedules."""

from asmlab.engine.gradcheck import GradCheckReport, grad_check
from asmlab.engine.optim import (
    OptimizerKind,
    OptimizerState,
    clip_gradients,
    global_grad_norm,
    optimizer_step,
    poly_lr,
)
from asmlab.engine.tensor import (
    Tape,
    TapeEntry,
    Tensor,
    layer_scope,
    set_finite_check,
    zero_grad,
)

__all__ = [
    "GradCheckReport",
    "OptimizerKind",
    "OptimizerState",
    "Tape",
    "TapeEntry",
    "Tensor",
    "clip_gradients",
    "global_grad_norm",
    "grad_check",
    "layer_scope",
    "optimizer_step",
    "poly_lr",
    "set_finite_check",
    "zero_grad",
]
