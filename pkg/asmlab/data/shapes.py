"""Synthetic figure-ground / multi-class segmentation scenes.

Each foreground class owns one parametric shape kind (disc, ring, rectangle,
thin bar, cycling for more classes) and its own intensity and stripe texture.
Later objects occlude earlier ones; the instance mask keeps whatever remains
visible of every object.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from asmlab.data.imageio import image_to_pgm, write_pgm
from asmlab.data.manifest import (
    DatasetManifest,
    SampleRecord,
    split_ids,
    write_manifest,
    write_split,
)
from asmlab.exceptions import ConfigurationError
from asmlab.logging_config import get_logger

logger = get_logger(__name__)

ShapeKind = Literal["disc", "ring", "rectangle", "bar"]
SHAPE_KINDS: tuple[ShapeKind, ...] = ("disc", "ring", "rectangle", "bar")
BACKGROUND_LEVEL = 0.15
NOISE_SIGMA = 0.03
# Instance ids are uint8 with 0 for background.
MAX_CLUTTER = 253


@dataclass(frozen=True)
class SceneObject:
    """A placed shape; params are in pixel units (row/col centers, extents)."""

    kind: ShapeKind
    class_id: int
    instance_id: int
    params: dict[str, float] = field(default_factory=dict)


@dataclass
class SegmentationScene:
    image: NDArray[np.float64]
    mask: NDArray[np.uint8]
    instances: NDArray[np.uint8]
    objects: list[SceneObject]


def class_shape(class_id: int) -> ShapeKind:
    if class_id < 1:
        raise ConfigurationError("Class 0 is background and has no shape", class_id=class_id)
    return SHAPE_KINDS[(class_id - 1) % len(SHAPE_KINDS)]


def class_level(class_id: int, classes: int) -> float:
    """Mean intensity of a foreground class, spread over [0.35, 0.95]."""
    if classes <= 2:
        return 0.75
    return 0.35 + 0.6 * (class_id - 1) / (classes - 2)


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Per-sample generator derived by hashing (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def _grid(size: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    centers = np.arange(size) + 0.5
    return np.meshgrid(centers, centers, indexing="ij")


def _place(kind: ShapeKind, rng: np.random.Generator, size: int) -> dict[str, float]:
    lo = max(3.0, size / 10)
    match kind:
        case "disc":
            r = rng.uniform(lo, size / 4)
            return {"cy": rng.uniform(r, size - r), "cx": rng.uniform(r, size - r), "r": r}
        case "ring":
            r = rng.uniform(lo + 2, size / 4 + 2)
            return {
                "cy": rng.uniform(r, size - r),
                "cx": rng.uniform(r, size - r),
                "r": r,
                "width": rng.uniform(1.5, 3.0),
            }
        case "rectangle":
            h, w = rng.uniform(lo, size / 2.5, size=2)
            return {
                "y0": rng.uniform(0, size - h),
                "x0": rng.uniform(0, size - w),
                "h": h,
                "w": w,
            }
        case "bar":
            length = rng.uniform(size / 3, size * 0.8)
            width = rng.uniform(1.0, 2.5)
            vertical = float(rng.random() < 0.5)
            h, w = (length, width) if vertical else (width, length)
            return {
                "y0": rng.uniform(0, size - h),
                "x0": rng.uniform(0, size - w),
                "h": h,
                "w": w,
                "vertical": vertical,
            }
    raise ConfigurationError(f"Unknown shape kind: {kind}")


def rasterize(kind: ShapeKind, params: dict[str, float], size: int) -> NDArray[np.bool_]:
    """Pixels whose centers fall inside the shape."""
    yy, xx = _grid(size)
    match kind:
        case "disc":
            return (yy - params["cy"]) ** 2 + (xx - params["cx"]) ** 2 <= params["r"] ** 2
        case "ring":
            d2 = (yy - params["cy"]) ** 2 + (xx - params["cx"]) ** 2
            inner = max(params["r"] - params["width"], 0.0)
            return (d2 <= params["r"] ** 2) & (d2 >= inner**2)
        case "rectangle" | "bar":
            return (
                (yy >= params["y0"])
                & (yy < params["y0"] + params["h"])
                & (xx >= params["x0"])
                & (xx < params["x0"] + params["w"])
            )
    raise ConfigurationError(f"Unknown shape kind: {kind}")


def _texture(class_id: int, size: int) -> NDArray[np.float64]:
    yy, xx = _grid(size)
    freq = 0.25 + 0.15 * class_id
    return 0.05 * np.sin(freq * (xx + 0.5 * class_id * yy))


def render_segmentation_scene(
    rng: np.random.Generator,
    size: int,
    classes: int,
    clutter_level: int = 0,
) -> SegmentationScene:
    """Draw 1 + clutter_level objects (at least one per image) over a textured background.

    clutter_level also raises the additive noise level.
    """
    n_objects = 1 + clutter_level
    image = BACKGROUND_LEVEL + 0.03 * np.sin(0.2 * _grid(size)[0])
    mask = np.zeros((size, size), dtype=np.uint8)
    instances = np.zeros((size, size), dtype=np.uint8)
    objects = []
    for k in range(n_objects):
        class_id = int(rng.integers(1, classes))
        kind = class_shape(class_id)
        params = _place(kind, rng, size)
        region = rasterize(kind, params, size)
        level = class_level(class_id, classes) + rng.uniform(-0.05, 0.05)
        image = np.where(region, level + _texture(class_id, size), image)
        mask[region] = class_id
        instances[region] = k + 1
        objects.append(SceneObject(kind, class_id, k + 1, params))
    image = image + rng.normal(0.0, NOISE_SIGMA * (1 + clutter_level), image.shape)
    return SegmentationScene(np.clip(image, 0.0, 1.0), mask, instances, objects)


def _write_sample(
    out_dir: Path, seed: int, index: int, size: int, classes: int, clutter_level: int
) -> SampleRecord:
    scene = render_segmentation_scene(sample_rng(seed, index), size, classes, clutter_level)
    sample_id = f"s{index:06d}"
    rel = {
        "image": f"samples/{sample_id}_image.pgm",
        "mask": f"samples/{sample_id}_mask.pgm",
        "instance": f"samples/{sample_id}_instance.pgm",
    }
    write_pgm(out_dir / rel["image"], image_to_pgm(scene.image))
    write_pgm(out_dir / rel["mask"], scene.mask)
    write_pgm(out_dir / rel["instance"], scene.instances)
    return SampleRecord(sample_id, rel["image"], (rel["mask"],), rel["instance"])


def gen_segmentation_set(
    seed: int,
    n: int,
    size: int,
    classes: int,
    clutter_level: int,
    out_dir: Path,
    val_fraction: float = 0.2,
    workers: int = 1,
) -> DatasetManifest:
    """Generate n segmentation samples plus manifest and train/val split under out_dir.

    Raises:
        ConfigurationError: If size < 16, classes < 2, n < 0 or clutter_level
            outside [0, MAX_CLUTTER]
    """
    if size < 16:
        raise ConfigurationError("size must be >= 16", size=size)
    if classes < 2 or classes > 255:
        raise ConfigurationError("classes must lie in [2, 255]", classes=classes)
    if n < 0:
        raise ConfigurationError("n must be >= 0", n=n)
    if not 0 <= clutter_level <= MAX_CLUTTER:
        raise ConfigurationError(
            f"clutter_level must lie in [0, {MAX_CLUTTER}]", clutter=clutter_level
        )

    out_dir.mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        records = list(
            pool.map(
                lambda i: _write_sample(out_dir, seed, i, size, classes, clutter_level),
                range(n),
            )
        )
    manifest = DatasetManifest(
        task="segmentation",
        classes=classes,
        records=records,
        params={
            "generator": "segmentation",
            "seed": str(seed),
            "size": str(size),
            "clutter_level": str(clutter_level),
            "val_fraction": str(val_fraction),
        },
        root=out_dir,
    )
    write_manifest(manifest)
    train, val = split_ids(manifest.ids, seed, val_fraction)
    write_split(out_dir, train, val)
    logger.info("dataset_generated", task="segmentation", samples=n, out_dir=str(out_dir))
    return manifest
