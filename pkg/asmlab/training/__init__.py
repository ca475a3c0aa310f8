"""The adversarial game: players, single-step updates, the training driver and theory probes."""

from asmlab.training.config import REGIMES, TrainConfig, parse_train_config
from asmlab.training.loop import (
    LOG_NAME,
    BatchSampler,
    TrainingResult,
    TrainLog,
    TrainRecord,
    read_train_log,
    resolve_checkpoint,
    run_training,
    training_step,
)
from asmlab.training.players import (
    Players,
    build_players,
    load_players,
    network_task,
    save_players,
    target_tensors,
)
from asmlab.training.probes import (
    TheoryProbeConfig,
    TheoryProbeReport,
    theory_probe,
    write_probe_report,
)
from asmlab.training.steps import (
    StepCounters,
    StepResult,
    TrainState,
    analyzer_step,
    discriminator_step,
    predictor_step,
)

__all__ = [
    "LOG_NAME",
    "REGIMES",
    "BatchSampler",
    "Players",
    "StepCounters",
    "StepResult",
    "TheoryProbeConfig",
    "TheoryProbeReport",
    "TrainConfig",
    "TrainLog",
    "TrainRecord",
    "TrainState",
    "TrainingResult",
    "analyzer_step",
    "build_players",
    "discriminator_step",
    "load_players",
    "network_task",
    "parse_train_config",
    "predictor_step",
    "read_train_log",
    "resolve_checkpoint",
    "run_training",
    "save_players",
    "target_tensors",
    "theory_probe",
    "training_step",
    "write_probe_report",
]
