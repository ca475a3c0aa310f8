"""Dataset manifests, train/val splits, checksums and sample loading.

Manifest text::

    ASMDATA1 <task> <classes>
    # key=value ...            (generator seed and parameters)
    id <TAB> image.pgm <TAB> target.(pgm|pfm) <TAB> instance.pgm

Paths are relative to the manifest's directory. The joint task lists its depth
and normal maps comma-separated in the target column.
"""

import hashlib
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from asmlab.data.imageio import pgm_to_image, read_pfm, read_pgm
from asmlab.exceptions import ConfigurationError, DataError, FileError, FormatError
from asmlab.tasks import TaskKind, resolve_task, target_roles

MAGIC = "ASMDATA1"
MANIFEST_NAME = "manifest.txt"
TRAIN_LIST = "train.txt"
VAL_LIST = "val.txt"


@dataclass(frozen=True)
class SampleRecord:
    """One manifest line."""

    id: str
    image: str
    targets: tuple[str, ...]
    instance: str

    def to_line(self) -> str:
        return "\t".join([self.id, self.image, ",".join(self.targets), self.instance])


@dataclass
class DatasetManifest:
    """Task, class count, sample records and generator parameters."""

    task: TaskKind
    classes: int
    records: list[SampleRecord] = field(default_factory=list)
    params: dict[str, str] = field(default_factory=dict)
    root: Path = Path(".")

    @property
    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    @property
    def path(self) -> Path:
        return self.root / MANIFEST_NAME

    def record(self, sample_id: str) -> SampleRecord:
        for r in self.records:
            if r.id == sample_id:
                return r
        raise DataError(f"Unknown sample id: {sample_id}", sample_id=sample_id)


@dataclass
class Sample:
    """One decoded sample: image in [0, 1], targets by role, instance ids."""

    id: str
    image: NDArray[np.float64]
    targets: dict[str, NDArray[np.float64] | NDArray[np.int64]]
    instances: NDArray[np.int64]


@dataclass
class Batch:
    """Stacked samples: images N x 1 x H x W, targets by role, instances N x H x W.

    Segmentation targets are N x H x W class ids; depth N x 1 x H x W; normals
    N x 3 x H x W.
    """

    ids: list[str]
    images: NDArray[np.float64]
    targets: dict[str, NDArray[np.float64] | NDArray[np.int64]]
    instances: NDArray[np.int64]

    def __len__(self) -> int:
        return len(self.ids)

    def take(self, index: Sequence[int] | NDArray[np.int64]) -> "Batch":
        idx = np.asarray(index, dtype=np.int64)
        return Batch(
            ids=[self.ids[i] for i in idx],
            images=self.images[idx],
            targets={role: t[idx] for role, t in self.targets.items()},
            instances=self.instances[idx],
        )


def format_manifest(manifest: DatasetManifest) -> str:
    lines = [f"{MAGIC} {manifest.task} {manifest.classes}"]
    if manifest.params:
        lines.append("# " + " ".join(f"{k}={v}" for k, v in sorted(manifest.params.items())))
    lines.extend(r.to_line() for r in manifest.records)
    return "\n".join(lines) + "\n"


def parse_manifest(
    text: str, root: Path = Path("."), source: str | None = None
) -> DatasetManifest:
    """Parse manifest text.

    Raises:
        FormatError: On a bad header, malformed line or duplicate id
    """
    lines = text.splitlines()
    if not lines:
        raise FormatError("manifest", "empty file", path=source)
    header = lines[0].split()
    if len(header) != 3 or header[0] != MAGIC:
        raise FormatError("manifest", f"bad header {lines[0]!r}", path=source)
    try:
        task = resolve_task(header[1])
        classes = int(header[2])
    except (ValueError, ConfigurationError) as e:
        raise FormatError("manifest", f"bad header {lines[0]!r}: {e}", path=source) from e
    if classes < 1:
        raise FormatError("manifest", "class count must be >= 1", path=source)

    params: dict[str, str] = {}
    records: list[SampleRecord] = []
    seen: set[str] = set()
    n_roles = len(target_roles(task))
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if "=" in token:
                    key, value = token.split("=", 1)
                    params[key] = value
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise FormatError("manifest", f"line {line_no}: expected 4 columns", path=source)
        sample_id, image, target, instance = cols
        targets = tuple(t for t in target.split(",") if t)
        if len(targets) != n_roles:
            raise FormatError(
                "manifest",
                f"line {line_no}: {task} needs {n_roles} target file(s)",
                path=source,
            )
        if sample_id in seen:
            raise FormatError("manifest", f"duplicate id {sample_id}", path=source)
        seen.add(sample_id)
        records.append(SampleRecord(sample_id, image, targets, instance))
    return DatasetManifest(task, classes, records, params, root)


def write_manifest(manifest: DatasetManifest) -> Path:
    path = manifest.path
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(format_manifest(manifest), encoding="utf-8")
    except OSError as e:
        raise FileError(str(path), "write", str(e)) from e
    return path


def read_manifest(path: Path, check_files: bool = True) -> DatasetManifest:
    """Read a manifest file (or the manifest inside a directory).

    Raises:
        FileError: If the manifest or a referenced file is missing
        FormatError: If the manifest does not parse
    """
    if path.is_dir():
        path = path / MANIFEST_NAME
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise FileError(str(path), "read", str(e)) from e
    manifest = parse_manifest(text, root=path.parent, source=str(path))
    if check_files:
        for record in manifest.records:
            for rel in (record.image, *record.targets, record.instance):
                if not (manifest.root / rel).is_file():
                    raise FileError(
                        str(manifest.root / rel), "read", f"referenced by sample {record.id}"
                    )
    return manifest


def manifest_checksum(manifest: DatasetManifest) -> str:
    """sha256 over the manifest text and every referenced file, in record order."""
    digest = hashlib.sha256(format_manifest(manifest).encode("utf-8"))
    for record in manifest.records:
        for rel in (record.image, *record.targets, record.instance):
            path = manifest.root / rel
            try:
                digest.update(path.read_bytes())
            except OSError as e:
                raise FileError(str(path), "read", str(e)) from e
    return digest.hexdigest()


def split_ids(
    ids: Sequence[str], seed: int, val_fraction: float = 0.2
) -> tuple[list[str], list[str]]:
    """Seeded shuffle into disjoint (train, val) id lists, each kept in manifest order."""
    if not 0.0 <= val_fraction < 1.0:
        raise DataError("val_fraction must lie in [0, 1)", val_fraction=val_fraction)
    order = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED])).permutation(len(ids))
    n_val = int(round(len(ids) * val_fraction))
    val_idx = set(order[:n_val].tolist())
    train = [sid for i, sid in enumerate(ids) if i not in val_idx]
    val = [sid for i, sid in enumerate(ids) if i in val_idx]
    return train, val


def write_split(root: Path, train: Iterable[str], val: Iterable[str]) -> None:
    try:
        (root / TRAIN_LIST).write_text("".join(f"{i}\n" for i in train), encoding="utf-8")
        (root / VAL_LIST).write_text("".join(f"{i}\n" for i in val), encoding="utf-8")
    except OSError as e:
        raise FileError(str(root), "write", str(e)) from e


def read_split(manifest: DatasetManifest, split: str) -> list[str]:
    """Ids of the "train" or "val" split ("all" returns every id).

    A manifest directory without split files treats every sample as training data
    and has an empty validation split.
    """
    if split == "all":
        return manifest.ids
    if split not in ("train", "val"):
        raise DataError(f"Unknown split: {split}", split=split)
    path = manifest.root / (TRAIN_LIST if split == "train" else VAL_LIST)
    if not path.exists():
        return manifest.ids if split == "train" else []
    try:
        ids = [line.strip() for line in path.read_text(encoding="utf-8").splitlines()]
    except OSError as e:
        raise FileError(str(path), "read", str(e)) from e
    known = set(manifest.ids)
    unknown = [i for i in ids if i and i not in known]
    if unknown:
        raise DataError(f"Split {split} lists unknown ids", ids=unknown[:8])
    return [i for i in ids if i]


def load_sample(manifest: DatasetManifest, record: SampleRecord) -> Sample:
    root = manifest.root
    image = pgm_to_image(read_pgm(root / record.image))
    instances = read_pgm(root / record.instance).astype(np.int64)
    targets: dict[str, NDArray[np.float64] | NDArray[np.int64]] = {}
    for role, rel in zip(target_roles(manifest.task), record.targets):
        if manifest.task == "segmentation":
            mask = read_pgm(root / rel).astype(np.int64)
            if mask.size and mask.max() >= manifest.classes:
                raise DataError(
                    f"Sample {record.id} has class ids >= {manifest.classes}",
                    sample_id=record.id,
                )
            targets[role] = mask
        else:
            values = read_pfm(root / rel)
            targets[role] = values[None] if values.ndim == 2 else values
    return Sample(record.id, image, targets, instances)


def load_samples(manifest: DatasetManifest, ids: Sequence[str] | None = None) -> Batch:
    """Decode and stack samples (all of them when ids is None).

    Raises:
        DataError: On unknown ids, mixed extents or out-of-range class ids
    """
    wanted = manifest.ids if ids is None else list(ids)
    samples = [load_sample(manifest, manifest.record(i)) for i in wanted]
    if not samples:
        return Batch([], np.zeros((0, 1, 0, 0)), {}, np.zeros((0, 0, 0), dtype=np.int64))
    shapes = {s.image.shape for s in samples}
    if len(shapes) != 1:
        raise DataError("Samples have different extents", shapes=sorted(shapes))
    return Batch(
        ids=wanted,
        images=np.stack([s.image for s in samples])[:, None],
        targets={
            role: np.stack([s.targets[role] for s in samples]) for role in samples[0].targets
        },
        instances=np.stack([s.instances for s in samples]),
    )
