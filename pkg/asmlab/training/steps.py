"""Single updates of each player.

The analyzer pass sees S(x) as a constant (optionally binarized); the predictor
pass differentiates through the analyzer back into S. Gradients that a pass
leaves on the other player's parameters are cleared before returning.
"""

from collections.abc import Mapping
from dataclasses import dataclass, field

from asmlab.engine import ops
from asmlab.engine.optim import (
    OptimizerState,
    clip_gradients,
    global_grad_norm,
    optimizer_step,
)
from asmlab.engine.tensor import Tape, Tensor, zero_grad
from asmlab.exceptions import UsageError
from asmlab.losses.adversarial import gan_losses, generator_loss
from asmlab.losses.pixelwise import iid_loss, sr_loss
from asmlab.losses.result import LossValue
from asmlab.losses.structure import asm_loss
from asmlab.nets.network import Network, binarize_wta, forward_with_taps
from asmlab.tasks import role_kind
from asmlab.training.config import ADAPTIVE_CLIP_NORM, ADAPTIVE_CLIP_TRIGGER, TrainConfig
from asmlab.training.players import (
    Players,
    analyzer_inputs,
    critic_input,
    raw_heads,
    structure_inputs,
)

Targets = Mapping[str, Tensor]


@dataclass
class StepCounters:
    """Update and feed counts, plus the order in which players were updated."""

    analyzer_updates: int = 0
    predictor_updates: int = 0
    discriminator_updates: int = 0
    binarized_feeds: int = 0
    soft_analyzer_feeds: int = 0
    predictor_soft_feeds: int = 0
    events: list[str] = field(default_factory=list)


@dataclass
class TrainState:
    """Everything a run mutates: networks, optimizer buffers, counters, clip latch."""

    config: TrainConfig
    players: Players
    classes: int
    optimizers: dict[str, OptimizerState] = field(default_factory=dict)
    counters: StepCounters = field(default_factory=StepCounters)
    clip_engaged: bool = False

    @property
    def lam(self) -> float:
        return self.config.resolved_lam(self.classes)

    def optimizer(self, group: str, kind: str, base_lr: float) -> OptimizerState:
        if group not in self.optimizers:
            self.optimizers[group] = OptimizerState(
                kind,  # type: ignore[arg-type]
                base_lr,
                momentum=self.config.momentum,
                weight_decay=self.config.weight_decay,
            )
        return self.optimizers[group]


@dataclass
class StepResult:
    value: float
    grad_norm: float
    asm: float = 0.0
    sr: float = 0.0


def _require(net: Network | None, what: str) -> Network:
    if net is None:
        raise UsageError(f"This regime has no {what}")
    return net


def predict(net: Network, x: Tensor) -> dict[str, Tensor]:
    heads, _ = forward_with_taps(net, x)
    return heads


def analyzer_taps(analyzer: Network, values: Targets, extra: tuple[str, ...] = ()) -> dict:
    _, taps = forward_with_taps(
        analyzer, analyzer_inputs(values), taps=(*analyzer.spec.taps, *extra)
    )
    return taps


def reconstruction(state: TrainState, features: Tensor, size: tuple[int, int]) -> dict:
    """R(A_t(y)) by role; segmentation reconstructions are class probabilities."""
    regularizer = _require(state.players.regularizer, "regularizer")
    heads, _ = forward_with_taps(regularizer, features, out_size=size)
    task = state.config.task
    out = {}
    for role, head in raw_heads(task, heads).items():
        out[role] = ops.softmax(head, axis=1) if role_kind(task, role) == "segmentation" else head
    return out


def analyzer_objective(
    state: TrainState, prediction: Targets, y: Targets
) -> tuple[Tensor, LossValue, LossValue | None]:
    """(loss to minimize, ASM term, SR term) for the analyzer/regularizer update.

    The analyzer ascends the ASM term; the SR term is descended (sr_sign=descend)
    or ascended with it (sr_sign=ascend). With λ = 0 the regularizer is not run.
    """
    analyzer = _require(state.players.analyzer, "analyzer")
    reg_tap = analyzer.spec.reg_tap or analyzer.spec.taps[-1]
    use_sr = state.lam > 0
    taps_gt = analyzer_taps(analyzer, y, (reg_tap,) if use_sr else ())
    taps_pred = analyzer_taps(analyzer, prediction)
    tap_names = analyzer.spec.taps
    asm = asm_loss(
        {t: taps_pred[t] for t in tap_names}, {t: taps_gt[t] for t in tap_names}
    )
    if not use_sr:
        return ops.scale(asm.value, -1.0), asm, None
    first = next(iter(y.values()))
    recon = reconstruction(state, taps_gt[reg_tap], (first.shape[2], first.shape[3]))
    sr = sr_loss(state.config.task, y, recon)
    sr_weighted = ops.scale(sr.value, state.lam)
    if state.config.sr_sign == "ascend":
        return ops.scale(ops.add(asm.value, sr_weighted), -1.0), asm, sr
    return ops.sub(sr_weighted, asm.value), asm, sr


def predictor_loss(state: TrainState, x: Tensor, y: Targets) -> tuple[Tensor, dict[str, float]]:
    """The predictor's objective for the configured regime, recorded on the active tape.

    Returns:
        (scalar loss, named component values)
    """
    config = state.config
    heads = predict(state.players.predictor, x)
    parts: dict[str, Tensor] = {}
    if config.regime in ("iid", "iid+asm", "gan", "cgan"):
        parts["iid"] = iid_loss(config.task, y, raw_heads(config.task, heads)).value
    if config.regime in ("asm", "iid+asm"):
        analyzer = _require(state.players.analyzer, "analyzer")
        taps_pred = analyzer_taps(analyzer, structure_inputs(config.task, heads))
        taps_gt = {t: v.detach() for t, v in analyzer_taps(analyzer, y).items()}
        parts["asm"] = asm_loss(taps_pred, taps_gt).value
    if config.regime in ("gan", "cgan"):
        critic = _require(state.players.discriminator, "discriminator")
        image = x if config.regime == "cgan" else None
        fake = critic_input(structure_inputs(config.task, heads), image)
        d_fake = predict(critic, fake)["output"]
        parts["gan"] = ops.scale(generator_loss(d_fake), config.gan_weight)

    total: Tensor | None = None
    for part in parts.values():
        total = part if total is None else ops.add(total, part)
    assert total is not None
    return total, {name: t.item() for name, t in parts.items()}


def _clip(state: TrainState, params: list[Tensor], adaptive_value: float | None) -> float:
    """Clip to clip_max_norm, or latch the adaptive cap once the objective blows up."""
    if adaptive_value is not None and adaptive_value > ADAPTIVE_CLIP_TRIGGER:
        state.clip_engaged = True
    max_norm = state.config.clip_max_norm
    if max_norm is None and state.clip_engaged:
        max_norm = ADAPTIVE_CLIP_NORM
    if max_norm is None:
        return global_grad_norm(params)
    return clip_gradients(params, max_norm)


def analyzer_step(state: TrainState, x: Tensor, y: Targets, lr: float) -> StepResult:
    """One update of θ_A and θ_R on a batch; the predictor is evaluated, never changed.

    Returns:
        StepResult with value = the analyzer's maximized objective
    """
    config = state.config
    analyzer = _require(state.players.analyzer, "analyzer")
    regularizer = _require(state.players.regularizer, "regularizer")
    soft = structure_inputs(config.task, predict(state.players.predictor, x))
    prediction: dict[str, Tensor] = {}
    for role, value in soft.items():
        if config.binarize:
            prediction[role] = binarize_wta(value)
        else:
            prediction[role] = value.detach()
    if config.binarize:
        state.counters.binarized_feeds += 1
    else:
        state.counters.soft_analyzer_feeds += 1

    params = analyzer.parameters() + regularizer.parameters()
    zero_grad(params)
    with Tape() as tape:
        loss, asm, sr = analyzer_objective(state, prediction, y)
    tape.backward(loss)
    zero_grad(state.players.predictor.parameters())
    for p in params:
        if p.grad is None:
            p.accumulate_grad(p.values * 0.0)

    objective = -loss.item()
    grad_norm = _clip(state, params, objective)
    optimizer_step(state.optimizer("analyzer", config.optimizer_a, config.base_lr_a), params, lr)
    state.counters.analyzer_updates += 1
    state.counters.events.append("analyzer")
    return StepResult(objective, grad_norm, asm.item(), sr.item() if sr is not None else 0.0)


def predictor_step(state: TrainState, x: Tensor, y: Targets, lr: float) -> StepResult:
    """One descent step on θ_S with soft predictions; other players are untouched."""
    config = state.config
    predictor = state.players.predictor
    params = predictor.parameters()
    zero_grad(params)
    with Tape() as tape:
        loss, parts = predictor_loss(state, x, y)
    tape.backward(loss)
    for role, net in state.players.items():
        if role != "predictor":
            zero_grad(net.parameters())
    grad_norm = _clip(state, params, None)
    optimizer_step(state.optimizer("predictor", config.optimizer_s, config.base_lr_s), params, lr)
    state.counters.predictor_updates += 1
    state.counters.predictor_soft_feeds += 1
    state.counters.events.append("predictor")
    return StepResult(loss.item(), grad_norm, asm=parts.get("asm", 0.0))


def discriminator_step(state: TrainState, x: Tensor, y: Targets, lr: float) -> StepResult:
    """One update of the GAN critic on real targets against detached predictions."""
    config = state.config
    critic = _require(state.players.discriminator, "discriminator")
    fake_values = {
        role: t.detach()
        for role, t in structure_inputs(config.task, predict(state.players.predictor, x)).items()
    }
    image = x if config.regime == "cgan" else None
    params = critic.parameters()
    zero_grad(params)
    with Tape() as tape:
        d_real = predict(critic, critic_input(y, image))["output"]
        d_fake = predict(critic, critic_input(fake_values, image))["output"]
        d_loss, _ = gan_losses(d_real, d_fake)
    tape.backward(d_loss)
    grad_norm = _clip(state, params, None)
    optimizer_step(
        state.optimizer("discriminator", config.optimizer_a, config.base_lr_a), params, lr
    )
    state.counters.discriminator_updates += 1
    state.counters.events.append("discriminator")
    return StepResult(d_loss.item(), grad_norm)
