"""Dense float64 tensors and the reverse-mode tape.

Every differentiable primitive in :mod:`asmlab.engine.ops` computes its forward
values with numpy and, when a :class:`Tape` is active, records a backward closure
with the signature ``backward(output_grad) -> tuple[input_grad | None, ...]``.
Replaying the tape visits entries in exact reverse recording order, so gradients
are bit-reproducible for a fixed program.

Example:
    w = Tensor(np.array([3.0]), requires_grad=True)
    with Tape() as tape:
        loss = ops.sum(ops.square(w))
    tape.backward(loss)
    w.grad  # array([6.])
"""

import itertools
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from asmlab.exceptions import NumericError, UsageError

Array = NDArray[np.float64]
BackwardFn = Callable[[Array], tuple[Array | None, ...]]

_ids = itertools.count()
_active_tape: ContextVar["Tape | None"] = ContextVar("asmlab_active_tape", default=None)
_current_layer: ContextVar[str | None] = ContextVar("asmlab_current_layer", default=None)
_finite_check = True


def set_finite_check(enabled: bool) -> None:
    """Toggle the NaN/Inf hard error raised after every primitive."""
    global _finite_check
    _finite_check = enabled


@contextmanager
def layer_scope(name: str) -> Iterator[None]:
    """Attribute numeric faults raised inside the block to a named layer."""
    token = _current_layer.set(name)
    try:
        yield
    finally:
        _current_layer.reset(token)


def check_finite(values: Array, op: str) -> None:
    """Raise NumericError when values contain NaN or Inf."""
    if _finite_check and not np.isfinite(values).all():
        layer = _current_layer.get()
        raise NumericError(
            op,
            f"Non-finite values produced by {op}" + (f" in layer {layer}" if layer else ""),
            layer=layer,
        )


class Tensor:
    """N-dimensional float64 array with a lazily allocated gradient buffer."""

    __slots__ = ("values", "grad", "requires_grad", "name", "uid")

    def __init__(
        self,
        values: ArrayLike,
        requires_grad: bool = False,
        name: str | None = None,
    ) -> None:
        self.values: Array = np.array(values, dtype=np.float64)
        self.grad: Array | None = None
        self.requires_grad = requires_grad
        self.name = name
        self.uid = next(_ids)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.values.shape)

    @property
    def size(self) -> int:
        return int(self.values.size)

    def item(self) -> float:
        """Return the value of a single-element tensor."""
        if self.values.size != 1:
            raise UsageError("item() needs a single-element tensor", shape=self.shape)
        return float(self.values.reshape(-1)[0])

    def numpy(self) -> Array:
        return self.values

    def detach(self) -> "Tensor":
        """Share values, drop gradient tracking."""
        return Tensor(self.values, requires_grad=False, name=self.name)

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, grad: Array) -> None:
        if grad.shape != self.values.shape:
            raise UsageError(
                "Gradient shape does not match tensor",
                tensor=self.name,
                expected=self.shape,
                found=grad.shape,
            )
        if self.grad is None:
            self.grad = np.array(grad, dtype=np.float64)
        else:
            self.grad += grad

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"


@dataclass
class TapeEntry:
    """One recorded primitive."""

    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn
    layer: str | None = None


class Tape:
    """Ordered record of primitive operations, used as a context manager."""

    def __init__(self) -> None:
        self.entries: list[TapeEntry] = []
        self._token: Any = None

    def __enter__(self) -> "Tape":
        self._token = _active_tape.set(self)
        return self

    def __exit__(self, *exc: object) -> None:
        _active_tape.reset(self._token)
        self._token = None

    def __len__(self) -> int:
        return len(self.entries)

    def record(self, entry: TapeEntry) -> None:
        self.entries.append(entry)

    @property
    def ops(self) -> list[str]:
        return [entry.op for entry in self.entries]

    def backward(self, loss: Tensor, seed: Array | None = None) -> None:
        """Propagate d(loss) through every recorded entry in reverse order.

        Args:
            loss: Output tensor to differentiate; must be single-element unless
                seed is given.
            seed: Optional upstream gradient for non-scalar outputs.

        Raises:
            UsageError: If loss is not scalar and no seed is given
            NumericError: If any propagated gradient is non-finite
        """
        if seed is None:
            if loss.size != 1:
                raise UsageError("backward() needs a scalar loss or an explicit seed")
            seed = np.ones_like(loss.values)
        loss.accumulate_grad(np.asarray(seed, dtype=np.float64))

        for entry in reversed(self.entries):
            upstream = entry.output.grad
            if upstream is None:
                continue
            grads = entry.backward(upstream)
            for tensor, grad in zip(entry.inputs, grads):
                if grad is None or not tensor.requires_grad:
                    continue
                if _finite_check and not np.isfinite(grad).all():
                    raise NumericError(
                        entry.op,
                        f"Non-finite gradient in backward of {entry.op}"
                        + (f" in layer {entry.layer}" if entry.layer else ""),
                        layer=entry.layer,
                    )
                tensor.accumulate_grad(grad)


def active_tape() -> Tape | None:
    return _active_tape.get()


def record(op: str, inputs: tuple[Tensor, ...], values: Array, backward: BackwardFn) -> Tensor:
    """Wrap forward values in a Tensor and record the op on the active tape."""
    check_finite(values, op)
    requires_grad = any(t.requires_grad for t in inputs)
    out = Tensor.__new__(Tensor)
    out.values = values
    out.grad = None
    out.requires_grad = requires_grad
    out.name = None
    out.uid = next(_ids)

    tape = _active_tape.get()
    if tape is not None and requires_grad:
        tape.record(TapeEntry(op, inputs, out, backward, _current_layer.get()))
    return out


def zero_grad(params: "Iterator[Tensor] | list[Tensor] | tuple[Tensor, ...]") -> None:
    """Clear gradients of every tensor in params."""
    for p in params:
        p.grad = None


def as_tensor(value: "Tensor | ArrayLike") -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)
