"""The training driver: batches, schedules, regime dispatch, logs and checkpoints."""

import csv
import io
import time
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import structlog

from asmlab.data.imageio import read_bytes, write_bytes
from asmlab.data.manifest import Batch, DatasetManifest, load_samples, read_split
from asmlab.engine.optim import poly_lr
from asmlab.engine.tensor import Tensor
from asmlab.exceptions import (
    ConfigurationError,
    DataError,
    FileError,
    NumericError,
    TrainingAbortedError,
)
from asmlab.logging_config import get_logger
from asmlab.tasks import role_kind
from asmlab.training.config import TrainConfig
from asmlab.training.players import Players, build_players, save_players, target_tensors
from asmlab.training.steps import (
    StepCounters,
    StepResult,
    TrainState,
    analyzer_step,
    discriminator_step,
    predictor_step,
)

logger = get_logger(__name__)

LOG_NAME = "train_log.csv"
CHECKPOINT_DIR = "checkpoints"
LOG_COLUMNS = ("iter", "lr_s", "lr_a", "loss_s", "obj_a", "sr", "gnorm_s", "gnorm_a", "wall_ms")


@dataclass(frozen=True)
class TrainRecord:
    iter: int
    lr_s: float
    lr_a: float
    loss_s: float
    obj_a: float
    sr: float
    gnorm_s: float
    gnorm_a: float
    wall_ms: int

    def to_row(self) -> list[str]:
        return [
            str(self.iter),
            *(repr(float(v)) for v in (self.lr_s, self.lr_a, self.loss_s, self.obj_a)),
            *(repr(float(v)) for v in (self.sr, self.gnorm_s, self.gnorm_a)),
            str(self.wall_ms),
        ]


@dataclass
class TrainLog:
    """Per-iteration records, mirrored line by line to a CSV file when path is set."""

    path: Path | None = None
    records: list[TrainRecord] = field(default_factory=list)

    def open(self) -> None:
        if self.path is not None:
            write_bytes(self.path, (",".join(LOG_COLUMNS) + "\n").encode("utf-8"))

    def append(self, record: TrainRecord) -> None:
        if self.records and record.iter <= self.records[-1].iter:
            raise DataError("TrainLog iterations must increase", iteration=record.iter)
        self.records.append(record)
        if self.path is not None:
            try:
                with self.path.open("a", encoding="utf-8", newline="") as f:
                    csv.writer(f, lineterminator="\n").writerow(record.to_row())
            except OSError as e:
                raise FileError(str(self.path), "append", str(e)) from e

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> list[float]:
        return [float(getattr(r, name)) for r in self.records]


def read_train_log(path: Path) -> TrainLog:
    rows = list(csv.DictReader(io.StringIO(read_bytes(path).decode("utf-8"))))
    log = TrainLog()
    for row in rows:
        log.records.append(
            TrainRecord(
                iter=int(row["iter"]),
                wall_ms=int(row["wall_ms"]),
                **{c: float(row[c]) for c in LOG_COLUMNS[1:-1]},
            )
        )
    return log


@dataclass
class TrainingResult:
    players: Players
    log: TrainLog
    counters: StepCounters
    checkpoint: Path | None


class BatchSampler:
    """Seeded epoch-wise shuffling; each epoch is a fresh permutation of all samples."""

    def __init__(self, size: int, batch_size: int, seed: int) -> None:
        self.size = size
        self.batch_size = batch_size
        self.rng = np.random.default_rng(np.random.SeedSequence([seed, 0xDA7A]))
        self._queue: list[int] = []

    def next_indices(self) -> np.ndarray:
        while len(self._queue) < self.batch_size:
            self._queue.extend(int(i) for i in self.rng.permutation(self.size))
        picked, self._queue = self._queue[: self.batch_size], self._queue[self.batch_size :]
        return np.array(picked, dtype=np.int64)

    def mirror_flags(self, n: int) -> np.ndarray:
        return self.rng.random(n) < 0.5


def mirror_batch(batch: Batch, flags: np.ndarray, task: str) -> Batch:
    """Flip flagged samples left-right; normal maps also negate their x component."""
    if not flags.any():
        return batch
    images = batch.images.copy()
    images[flags] = images[flags][..., ::-1]
    targets = {}
    for role, values in batch.targets.items():
        out = values.copy()
        out[flags] = out[flags][..., ::-1]
        if role_kind(task, role) == "normal":  # type: ignore[arg-type]
            out[flags, 0] = -out[flags, 0]
        targets[role] = out
    instances = batch.instances.copy()
    instances[flags] = instances[flags][..., ::-1]
    return Batch(batch.ids, images, targets, instances)


def checkpoint_dir(out_dir: Path, iteration: int) -> Path:
    return out_dir / CHECKPOINT_DIR / f"iter_{iteration:06d}"


def latest_checkpoint(out_dir: Path) -> Path | None:
    root = out_dir / CHECKPOINT_DIR
    if not root.is_dir():
        return None
    dirs = sorted(p for p in root.iterdir() if p.is_dir() and p.name.startswith("iter_"))
    return dirs[-1] if dirs else None


def resolve_checkpoint(path: Path, role: str = "predictor") -> Path:
    """Accept a .ckpt file, an iter_XXXXXX directory or a run directory (latest iter).

    Raises:
        ConfigurationError: If no checkpoint for role is found
    """
    if path.is_file():
        return path
    candidates = [path / f"{role}.ckpt"]
    latest = latest_checkpoint(path)
    if latest is not None:
        candidates.append(latest / f"{role}.ckpt")
    for candidate in candidates:
        if candidate.is_file():
            return candidate
    raise ConfigurationError(f"No {role} checkpoint under {path}", path=str(path), role=role)


def _save(players: Players, out_dir: Path, iteration: int) -> Path:
    directory = checkpoint_dir(out_dir, iteration)
    save_players(players, directory)
    logger.debug("checkpoint_saved", iteration=iteration, path=str(directory))
    return directory


def training_step(
    state: TrainState, x: Tensor, y: dict[str, Tensor], lr_s: float, lr_a: float
) -> tuple[StepResult, StepResult | None]:
    """One iteration of the configured regime: (predictor result, other player's result)."""
    regime = state.config.regime
    other: StepResult | None = None
    if regime in ("asm", "iid+asm"):
        other = analyzer_step(state, x, y, lr_a)
    elif regime in ("gan", "cgan"):
        other = discriminator_step(state, x, y, lr_a)
    return predictor_step(state, x, y, lr_s), other


def run_training(
    config: TrainConfig,
    manifest: DatasetManifest,
    out_dir: Path,
    ids: list[str] | None = None,
) -> TrainingResult:
    """Train on the manifest's train split (or ids) and write checkpoints and the log.

    Raises:
        ConfigurationError: If the manifest task differs from config.task
        DataError: If there is nothing to train on
        TrainingAbortedError: On a non-finite value mid-run; the last checkpoint stays on disk
    """
    if manifest.task != config.task:
        raise ConfigurationError(
            f"Config task {config.task} does not match dataset task {manifest.task}",
            config_task=config.task,
            dataset_task=manifest.task,
        )
    train_ids = ids if ids is not None else read_split(manifest, "train")
    if not train_ids:
        raise DataError("Training set is empty", manifest=str(manifest.path))
    data = load_samples(manifest, train_ids)

    players = build_players(config, manifest.classes)
    state = TrainState(config, players, manifest.classes)
    log = TrainLog(out_dir / LOG_NAME)
    log.open()
    sampler = BatchSampler(len(data), config.batch_size, config.shuffle_seed)

    run_id = uuid.uuid4().hex[:12]
    structlog.contextvars.bind_contextvars(run_id=run_id, regime=config.regime, task=config.task)
    last_checkpoint: Path | None = None
    iteration = 0
    try:
        logger.info(
            "training_started",
            samples=len(data),
            max_iter=config.max_iter,
            parameters=players.num_parameters(),
            lam=state.lam,
        )
        if config.checkpoint_every:
            last_checkpoint = _save(players, out_dir, 0)
        for iteration in range(1, config.max_iter + 1):
            started = time.perf_counter()
            lr_s = poly_lr(config.base_lr_s, iteration - 1, config.max_iter, config.poly_power)
            lr_a = poly_lr(config.base_lr_a, iteration - 1, config.max_iter, config.poly_power)
            batch = data.take(sampler.next_indices())
            if config.mirror:
                batch = mirror_batch(batch, sampler.mirror_flags(len(batch)), config.task)
            x = Tensor(batch.images)
            y = target_tensors(config.task, batch, manifest.classes)

            try:
                pred, other = training_step(state, x, y, lr_s, lr_a)
            except NumericError as e:
                logger.error(
                    "numeric_fault",
                    iteration=iteration,
                    op=e.op,
                    layer=e.context.get("layer"),
                    checkpoint=str(last_checkpoint) if last_checkpoint else None,
                )
                raise TrainingAbortedError(
                    e.op,
                    iteration - 1,
                    str(last_checkpoint) if last_checkpoint else None,
                ) from e

            wall_ms = int((time.perf_counter() - started) * 1000)
            record = TrainRecord(
                iter=iteration,
                lr_s=lr_s,
                lr_a=lr_a,
                loss_s=pred.value,
                obj_a=other.value if other else 0.0,
                sr=other.sr if other else 0.0,
                gnorm_s=pred.grad_norm,
                gnorm_a=other.grad_norm if other else 0.0,
                wall_ms=wall_ms if config.record_wall_time else 0,
            )
            log.append(record)
            logger.debug("train_iteration", **asdict(record))
            if iteration % config.log_every == 0 or iteration == config.max_iter:
                logger.info(
                    "train_progress",
                    iteration=iteration,
                    loss_s=record.loss_s,
                    obj_a=record.obj_a,
                    sr=record.sr,
                )
            if config.checkpoint_every and iteration % config.checkpoint_every == 0:
                last_checkpoint = _save(players, out_dir, iteration)

        if last_checkpoint is None or not last_checkpoint.name.endswith(f"{iteration:06d}"):
            last_checkpoint = _save(players, out_dir, iteration)
        logger.info("training_completed", iterations=iteration, checkpoint=str(last_checkpoint))
    finally:
        structlog.contextvars.unbind_contextvars("run_id", "regime", "task")

    return TrainingResult(players, log, state.counters, last_checkpoint)
