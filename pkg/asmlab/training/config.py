"""Training hyperparameters, validated before any compute starts."""

from collections.abc import Mapping
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from asmlab.engine.optim import OptimizerKind
from asmlab.exceptions import ConfigurationError
from asmlab.tasks import TaskKind

Regime = Literal["iid", "gan", "cgan", "asm", "iid+asm"]
SrSign = Literal["descend", "ascend"]

REGIMES: tuple[str, ...] = ("iid", "gan", "cgan", "asm", "iid+asm")
ADAPTIVE_CLIP_TRIGGER = 1e3
ADAPTIVE_CLIP_NORM = 10.0


class TrainConfig(BaseModel):
    """One training run.

    The analyzer (and discriminator) learning rate may never exceed the
    predictor's; both follow the same poly schedule from their bases.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    regime: Regime = Field(default="asm", description="iid | gan | cgan | asm | iid+asm")
    task: TaskKind = Field(default="segmentation", description="Task the predictor solves")
    lam: float | None = Field(
        default=None, ge=0.0, description="SR weight; None picks 2 for two classes, else 10"
    )
    base_lr_s: float = Field(default=1e-3, gt=0.0, description="Predictor base learning rate")
    base_lr_a: float = Field(default=1e-3, gt=0.0, description="Analyzer base learning rate")
    optimizer_s: OptimizerKind = "adam"
    optimizer_a: OptimizerKind = "adam"
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    weight_decay: float = Field(default=0.0, ge=0.0)
    max_iter: int = Field(default=500, ge=0)
    batch_size: int = Field(default=8, ge=1)
    poly_power: float = Field(default=0.9, ge=0.0)

    predictor_template: str = "desk_predictor"
    analyzer_template: str = "desk_analyzer"
    width_divisor: int = Field(default=1, ge=1)
    taps: tuple[str, ...] | None = Field(
        default=None, description="Analyzer layers matched by the ASM loss (template default)"
    )
    reg_width: int = Field(default=16, ge=1, description="Regularizer decoder width")

    binarize: bool = Field(default=False, description="WTA-binarize S(x) on the analyzer pass")
    clip_max_norm: float | None = Field(default=None, gt=0.0)
    sr_sign: SrSign = "descend"
    gan_weight: float = Field(default=0.01, ge=0.0, description="Adversarial term weight")
    mirror: bool = Field(default=False, description="Random horizontal mirroring")

    seed: int = Field(default=0, ge=0, description="Parameter initialization seed")
    data_seed: int | None = Field(default=None, ge=0, description="Shuffle seed (default: seed)")
    checkpoint_every: int = Field(default=0, ge=0, description="0 keeps only the final state")
    log_every: int = Field(default=50, ge=1)
    record_wall_time: bool = Field(default=False, description="False writes wall_ms = 0")

    @model_validator(mode="after")
    def check_invariants(self) -> "TrainConfig":
        if self.base_lr_a > self.base_lr_s:
            raise ValueError(
                f"base_lr_a ({self.base_lr_a}) must not exceed base_lr_s ({self.base_lr_s}): "
                "the analyzer may not learn faster than the structured predictor"
            )
        if self.binarize and self.task != "segmentation":
            raise ValueError("binarize applies to segmentation only")
        return self

    @property
    def shuffle_seed(self) -> int:
        return self.seed if self.data_seed is None else self.data_seed

    @property
    def uses_analyzer(self) -> bool:
        return self.regime in ("asm", "iid+asm")

    @property
    def uses_discriminator(self) -> bool:
        return self.regime in ("gan", "cgan")

    def resolved_lam(self, classes: int) -> float:
        """Configured λ, or 2 for two-class segmentation and 10 otherwise."""
        if self.lam is not None:
            return self.lam
        return 2.0 if self.task == "segmentation" and classes == 2 else 10.0


def parse_train_config(values: Mapping[str, Any]) -> TrainConfig:
    """Validate a mapping into a TrainConfig.

    Raises:
        ConfigurationError: Listing every rejected field
    """
    try:
        return TrainConfig.model_validate(dict(values))
    except ValidationError as e:
        problems = [
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
            for err in e.errors()
        ]
        raise ConfigurationError(
            "Invalid training config: " + "; ".join(problems), errors=problems
        ) from e
