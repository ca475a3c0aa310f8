"""Per-pixel objectives: IID baselines and the structure-regularization reconstruction loss."""

from collections.abc import Mapping

import numpy as np

from asmlab.engine import ops
from asmlab.engine.tensor import Tensor
from asmlab.exceptions import UsageError
from asmlab.losses.result import LossValue
from asmlab.tasks import TargetKind, TaskKind, role_kind, target_roles

NORMAL_EPS = 1e-8
LOG_FLOOR = 1e-12
SIMPLEX_TOL = 1e-6

TargetLike = Tensor | Mapping[str, Tensor]


def _by_role(task: TaskKind, value: TargetLike, what: str) -> dict[str, Tensor]:
    roles = target_roles(task)
    if isinstance(value, Tensor):
        if len(roles) != 1:
            raise UsageError(f"Joint task needs {what} as a mapping by role", roles=roles)
        return {roles[0]: value}
    missing = [r for r in roles if r not in value]
    if missing:
        raise UsageError(f"{what} is missing role(s): {', '.join(missing)}", missing=missing)
    return {r: value[r] for r in roles}


def _pixels(t: Tensor) -> int:
    n, _, h, w = t.shape
    return n * h * w


def _check_pair(role: str, y: Tensor, other: Tensor) -> None:
    if y.shape != other.shape:
        raise UsageError(
            f"Shapes differ for {role}", role=role, target=y.shape, prediction=other.shape
        )
    if y.values.ndim != 4:
        raise UsageError(f"{role} must be N x C x H x W", role=role, shape=y.shape)


def cross_entropy(y: Tensor, log_probs: Tensor) -> Tensor:
    """Mean over pixels of -Σ_c y_c log p_c."""
    return ops.scale(ops.sum(ops.mul(y, log_probs)), -1.0 / _pixels(y))


def normalized_l2(y: Tensor, pred: Tensor) -> Tensor:
    """Mean over pixels of ‖pred/|pred| - y/|y|‖², with an ε-floor on both norms."""
    diff = ops.sub(
        ops.normalize_channels(pred, NORMAL_EPS), ops.normalize_channels(y, NORMAL_EPS)
    )
    return ops.scale(ops.sum(ops.square(diff)), 1.0 / _pixels(y))


def _check_simplex(recon: Tensor) -> None:
    v = recon.values
    if (v < -SIMPLEX_TOL).any() or not np.allclose(v.sum(axis=1), 1.0, atol=SIMPLEX_TOL):
        raise UsageError("Segmentation reconstruction must be a per-pixel probability simplex")


def _term(kind: TargetKind, y: Tensor, pred: Tensor, reconstruction: bool) -> Tensor:
    match kind:
        case "segmentation":
            if reconstruction:
                _check_simplex(pred)
                return cross_entropy(y, ops.log(pred, floor=LOG_FLOOR))
            return cross_entropy(y, ops.log_softmax(pred, axis=1))
        case "depth":
            mse = ops.mean(ops.square(ops.sub(pred, y)))
            return mse if reconstruction else ops.scale(mse, 0.5)
        case "normal":
            return normalized_l2(y, pred)
    raise UsageError(f"Unknown target kind: {kind}")


def _combined(
    task: TaskKind, y: TargetLike, pred: TargetLike, reconstruction: bool
) -> LossValue:
    ys = _by_role(task, y, "target")
    preds = _by_role(task, pred, "prediction")
    total: Tensor | None = None
    for role, target in ys.items():
        _check_pair(role, target, preds[role])
        term = _term(role_kind(task, role), target, preds[role], reconstruction)
        total = term if total is None else ops.add(total, term)
    assert total is not None
    return LossValue(total)


def iid_loss(task: TaskKind, y: TargetLike, pred: TargetLike) -> LossValue:
    """Pixel-wise baseline loss.

    segmentation: softmax cross-entropy of logits against one-hot y, averaged over
    pixels; depth: mean ½(pred - y)²; normal: normalized L2; joint: depth + normal.

    Raises:
        UsageError: On shape mismatch or missing joint roles
    """
    return _combined(task, y, pred, reconstruction=False)


def sr_loss(task: TaskKind, y: TargetLike, recon: TargetLike) -> LossValue:
    """Structure-regularization loss between y and the regularizer's reconstruction.

    segmentation: mean pixel cross-entropy -y·log(recon) where recon holds class
    probabilities; depth: mean squared error; normal: normalized L2; joint: sum.

    Raises:
        UsageError: On shape mismatch, or a segmentation recon that is not a simplex
    """
    return _combined(task, y, recon, reconstruction=True)


def one_hot(mask: np.ndarray, classes: int) -> np.ndarray:
    """N x H x W integer mask -> N x C x H x W float one-hot."""
    m = np.asarray(mask)
    if m.size and (m.min() < 0 or m.max() >= classes):
        raise UsageError("Class id out of range for one-hot", classes=classes)
    out = np.zeros((m.shape[0], classes, *m.shape[1:]), dtype=np.float64)
    np.put_along_axis(out, m[:, None].astype(np.int64), 1.0, axis=1)
    return out
