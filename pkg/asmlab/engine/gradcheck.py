"""Central finite-difference validation of tape gradients."""

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from asmlab.engine.tensor import Tape, Tensor, zero_grad
from asmlab.exceptions import NumericError, UsageError


@dataclass
class GradCheckReport:
    """Outcome of a gradient check."""

    max_rel_error: float
    tolerance: float
    checked: int
    worst_param: str | None = None
    worst_index: tuple[int, ...] | None = None

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance


def relative_error(analytic: float, numeric: float, floor: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def grad_check(
    loss_fn: Callable[[], Tensor],
    params: Sequence[Tensor],
    step: float = 1e-6,
    tolerance: float = 1e-5,
    max_samples: int = 32,
    floor: float = 1e-3,
    seed: int = 0,
) -> GradCheckReport:
    """Compare tape gradients against central differences on sampled coordinates.

    loss_fn must rebuild the graph on every call from the current parameter values
    and return a scalar. Up to max_samples coordinates per parameter are probed,
    chosen by a seeded generator. The relative error denominator is floored so
    near-zero gradients are compared on an absolute scale.

    Raises:
        UsageError: If loss_fn does not return a scalar
        NumericError: If the loss is non-finite at the probe point
    """
    zero_grad(params)
    with Tape() as tape:
        loss = loss_fn()
    if loss.size != 1:
        raise UsageError("grad_check needs a scalar loss", shape=loss.shape)
    if not np.isfinite(loss.values).all():
        raise NumericError("grad_check", "Loss is non-finite at the probe point")
    tape.backward(loss)
    analytic = [
        p.grad.copy() if p.grad is not None else np.zeros_like(p.values) for p in params
    ]
    zero_grad(params)

    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_param: str | None = None
    worst_index: tuple[int, ...] | None = None
    checked = 0
    for pi, p in enumerate(params):
        flat = p.values.reshape(-1)
        count = min(max_samples, flat.size)
        picks = np.sort(rng.choice(flat.size, size=count, replace=False))
        for flat_idx in picks:
            original = flat[flat_idx]
            flat[flat_idx] = original + step
            f_plus = loss_fn().item()
            flat[flat_idx] = original - step
            f_minus = loss_fn().item()
            flat[flat_idx] = original
            numeric = (f_plus - f_minus) / (2.0 * step)
            a = float(analytic[pi].reshape(-1)[flat_idx])
            err = relative_error(a, numeric, floor)
            checked += 1
            if err > worst:
                worst = err
                worst_param = p.name or f"#{pi}"
                worst_index = tuple(int(i) for i in np.unravel_index(flat_idx, p.shape))

    return GradCheckReport(
        max_rel_error=worst,
        tolerance=tolerance,
        checked=checked,
        worst_param=worst_param,
        worst_index=worst_index,
    )
