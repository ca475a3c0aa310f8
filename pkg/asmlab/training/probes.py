"""Executable checks of the minimax game's theory.

* divergence: a linear analyzer A(z) = w z facing a prediction off by ε in one
  coordinate; the matching value grows as w² and has no upper bound.
* equivalence: the value is zero exactly when the prediction equals the target.
* equilibrium: against an oracle predictor, analyzer ascent cannot move the value
  off zero.
* lr sweep: how often short adversarial runs blow up as lr_A / lr_S grows.
"""

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from asmlab.data.imageio import write_text
from asmlab.data.manifest import Batch
from asmlab.data.shapes import render_segmentation_scene, sample_rng
from asmlab.engine import ops
from asmlab.engine.optim import OptimizerState, optimizer_step
from asmlab.engine.tensor import Tape, Tensor, zero_grad
from asmlab.exceptions import NumericError
from asmlab.logging_config import get_logger
from asmlab.losses.pixelwise import one_hot
from asmlab.losses.structure import asm_loss
from asmlab.nets.network import Network, build_network, forward_with_taps
from asmlab.nets.spec import LayerSpec, NetworkSpec, load_template
from asmlab.training.config import ADAPTIVE_CLIP_TRIGGER, TrainConfig
from asmlab.training.players import build_players, target_tensors
from asmlab.training.steps import TrainState, analyzer_step, predictor_step

logger = get_logger(__name__)

PROBE_NAME = "probe.csv"


class TheoryProbeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    weights: list[float] = Field(default=[1.0, 10.0, 100.0, 1000.0, 10000.0])
    epsilons: list[float] = Field(default=[0.0, 0.1])
    bound: float = Field(default=1.0, gt=0.0, description="Value the sweep must exceed")
    size: int = Field(default=4, ge=1, description="Side of the probe maps")
    equivalence_cases: int = Field(default=1000, ge=1)
    ascent_steps: int = Field(default=100, ge=1)
    ascent_lr: float = Field(default=1e-2, gt=0.0)
    lr_ratios: list[float] = Field(default=[0.5, 1.0, 4.0, 16.0])
    sweep_base_lr: float = Field(default=1e-2, gt=0.0)
    sweep_iters: int = Field(default=30, ge=1)
    sweep_runs: int = Field(default=3, ge=1)
    seed: int = Field(default=0, ge=0)

    @field_validator("weights", "lr_ratios")
    @classmethod
    def nonempty_positive(cls, v: list[float]) -> list[float]:
        if not v:
            raise ValueError("grid must not be empty")
        if any(x <= 0 for x in v):
            raise ValueError("grid values must be > 0")
        return v

    @field_validator("epsilons")
    @classmethod
    def has_nonzero_epsilon(cls, v: list[float]) -> list[float]:
        if not any(e != 0 for e in v):
            raise ValueError("at least one epsilon must be nonzero")
        return v


@dataclass
class DivergenceRow:
    epsilon: float
    weight: float
    value: float


@dataclass
class SweepRow:
    ratio: float
    runs: int
    diverged: int

    @property
    def frequency(self) -> float:
        return self.diverged / self.runs


@dataclass
class TheoryProbeReport:
    divergence: list[DivergenceRow] = field(default_factory=list)
    divergence_increasing: bool = False
    divergence_exceeds_bound: bool = False
    equivalence_cases: int = 0
    equivalence_equal: int = 0
    equivalence_zero: int = 0
    equivalence_consistent: bool = False
    equilibrium_values: list[float] = field(default_factory=list)
    sweep: list[SweepRow] = field(default_factory=list)

    @property
    def equilibrium_max_abs(self) -> float:
        return max((abs(v) for v in self.equilibrium_values), default=0.0)


def linear_analyzer(weight: float, channels: int = 1) -> Network:
    """A 1x1 convolution z -> w z (no bias, no activation), tapped at its output."""
    spec = NetworkSpec(
        layers=(LayerSpec("output", ("input",), 1, channels),),
        inputs=(("input", channels),),
        role="analyzer",
        taps=("output",),
        name="linear_analyzer",
    )
    net = build_network(spec, seed=0)
    net.params["output.0.weight"].values[...] = weight * np.eye(channels)[:, :, None, None]
    net.params["output.0.bias"].values[...] = 0.0
    return net


def matching_value(analyzer: Network, prediction: Tensor, target: Tensor) -> Tensor:
    _, taps_pred = forward_with_taps(analyzer, prediction, taps=analyzer.spec.taps)
    _, taps_gt = forward_with_taps(analyzer, target, taps=analyzer.spec.taps)
    return asm_loss(taps_pred, taps_gt).value


def divergence_curve(probe: TheoryProbeConfig) -> list[DivergenceRow]:
    rng = np.random.default_rng(probe.seed)
    target = rng.normal(size=(1, 1, probe.size, probe.size))
    rows = []
    for eps in probe.epsilons:
        prediction = target.copy()
        prediction[0, 0, 0, 0] += eps
        for w in sorted(probe.weights):
            value = matching_value(linear_analyzer(w), Tensor(prediction), Tensor(target))
            rows.append(DivergenceRow(eps, w, value.item()))
    return rows


def equivalence_table(probe: TheoryProbeConfig) -> tuple[int, int, bool]:
    """(cases with prediction == target, cases with value == 0, both sets identical)."""
    rng = np.random.default_rng([probe.seed, 1])
    equal = zero = 0
    consistent = True
    for _ in range(probe.equivalence_cases):
        target = rng.normal(size=(1, 1, probe.size, probe.size))
        prediction = target.copy()
        same = bool(rng.random() < 0.5)
        if not same:
            idx = tuple(int(i) for i in rng.integers(0, probe.size, size=2))
            prediction[(0, 0, *idx)] += rng.choice([-1.0, 1.0]) * rng.uniform(1e-3, 1.0)
        w = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
        is_zero = matching_value(linear_analyzer(w), Tensor(prediction), Tensor(target)).item() == 0
        equal += same
        zero += is_zero
        consistent &= same == is_zero
    return equal, zero, consistent


def equilibrium_trace(probe: TheoryProbeConfig) -> list[float]:
    """Matching value under analyzer ascent when the prediction is the target itself."""
    rng = np.random.default_rng([probe.seed, 2])
    size = 16
    mask = rng.integers(0, 2, size=(2, size, size))
    target = Tensor(one_hot(mask, 2))
    spec = load_template("desk_analyzer", width_divisor=4).with_inputs({"input": 2})
    analyzer = build_network(spec, seed=probe.seed)
    state = OptimizerState("sgd-momentum", probe.ascent_lr, momentum=0.0)
    params = analyzer.parameters()
    values = []
    for _ in range(probe.ascent_steps):
        zero_grad(params)
        with Tape() as tape:
            value = matching_value(analyzer, Tensor(target.values.copy()), target)
        tape.backward(ops.scale(value, -1.0))
        for p in params:
            if p.grad is None:
                p.accumulate_grad(np.zeros_like(p.values))
        optimizer_step(state, params, probe.ascent_lr)
        values.append(value.item())
    return values


def _sweep_batch(seed: int, n: int = 4, size: int = 16, classes: int = 2) -> Batch:
    scenes = [render_segmentation_scene(sample_rng(seed, i), size, classes) for i in range(n)]
    return Batch(
        ids=[f"p{i}" for i in range(n)],
        images=np.stack([s.image for s in scenes])[:, None],
        targets={"target": np.stack([s.mask.astype(np.int64) for s in scenes])},
        instances=np.stack([s.instances.astype(np.int64) for s in scenes]),
    )


def lr_ratio_sweep(probe: TheoryProbeConfig) -> list[SweepRow]:
    """Short asm runs per lr_A / lr_S ratio, counting non-finite or exploding objectives.

    Ratios above 1 bypass the learning-rate ordering check on purpose.
    """
    rows = []
    for ratio in probe.lr_ratios:
        diverged = 0
        for run in range(probe.sweep_runs):
            config = TrainConfig.model_construct(
                regime="asm",
                task="segmentation",
                lam=0.0,
                base_lr_s=probe.sweep_base_lr,
                base_lr_a=probe.sweep_base_lr * ratio,
                optimizer_s="sgd-momentum",
                optimizer_a="sgd-momentum",
                width_divisor=4,
                seed=probe.seed + run,
            )
            batch = _sweep_batch(probe.seed + run)
            state = TrainState(config, build_players(config, 2), 2)
            x, y = Tensor(batch.images), target_tensors("segmentation", batch, 2)
            try:
                for _ in range(probe.sweep_iters):
                    result = analyzer_step(state, x, y, config.base_lr_a)
                    predictor_step(state, x, y, config.base_lr_s)
                    if result.value > ADAPTIVE_CLIP_TRIGGER:
                        diverged += 1
                        break
            except NumericError:
                diverged += 1
        rows.append(SweepRow(ratio, probe.sweep_runs, diverged))
    return rows


def theory_probe(probe: TheoryProbeConfig) -> TheoryProbeReport:
    report = TheoryProbeReport()
    report.divergence = divergence_curve(probe)
    nonzero = [e for e in probe.epsilons if e != 0]
    increasing = True
    exceeds = True
    for eps in nonzero:
        values = [r.value for r in report.divergence if r.epsilon == eps]
        increasing &= all(b > a for a, b in zip(values, values[1:]))
        exceeds &= values[-1] > probe.bound
    report.divergence_increasing = increasing
    report.divergence_exceeds_bound = exceeds

    equal, zero, consistent = equivalence_table(probe)
    report.equivalence_cases = probe.equivalence_cases
    report.equivalence_equal = equal
    report.equivalence_zero = zero
    report.equivalence_consistent = consistent

    report.equilibrium_values = equilibrium_trace(probe)
    report.sweep = lr_ratio_sweep(probe)
    logger.info(
        "theory_probe_completed",
        divergence_increasing=increasing,
        equivalence_consistent=consistent,
        equilibrium_max_abs=report.equilibrium_max_abs,
        sweep=[(r.ratio, r.diverged) for r in report.sweep],
    )
    return report


def format_probe_report(report: TheoryProbeReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    buf.write("# divergence\n")
    writer.writerow(["epsilon", "weight", "value"])
    for row in report.divergence:
        writer.writerow([repr(row.epsilon), repr(row.weight), repr(row.value)])
    buf.write("# divergence_checks\n")
    writer.writerow(["check", "passed"])
    writer.writerow(["strictly_increasing", int(report.divergence_increasing)])
    writer.writerow(["exceeds_bound", int(report.divergence_exceeds_bound)])
    buf.write("# equivalence\n")
    writer.writerow(["cases", "equal", "zero", "consistent"])
    writer.writerow(
        [
            report.equivalence_cases,
            report.equivalence_equal,
            report.equivalence_zero,
            int(report.equivalence_consistent),
        ]
    )
    buf.write("# equilibrium\n")
    writer.writerow(["step", "value"])
    for step, value in enumerate(report.equilibrium_values, start=1):
        writer.writerow([step, repr(value)])
    buf.write("# lr_sweep\n")
    writer.writerow(["ratio", "runs", "diverged", "frequency"])
    for row in report.sweep:
        writer.writerow([repr(row.ratio), row.runs, row.diverged, repr(row.frequency)])
    return buf.getvalue()


def write_probe_report(report: TheoryProbeReport, out_dir: Path) -> Path:
    path = out_dir / PROBE_NAME
    write_text(path, format_probe_report(report))
    return path
