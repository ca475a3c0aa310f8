"""Orthographic piecewise-planar scenes with analytic depth and surface normals.

Image coordinates (u to the right, v downward) are in scene units; a surface
is a plane depth(u, v) = d0 + gu * u + gv * v, optionally restricted to an image
rectangle. Its normal, pointing at the viewer, is normalize(-gu, -gv, 1), so a
fronto-parallel plane has normal (0, 0, 1). Visibility is a per-pixel z-buffer.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from asmlab.data.imageio import image_to_pgm, write_pfm, write_pgm
from asmlab.data.manifest import (
    DatasetManifest,
    SampleRecord,
    split_ids,
    write_manifest,
    write_split,
)
from asmlab.data.shapes import sample_rng
from asmlab.exceptions import ConfigurationError
from asmlab.logging_config import get_logger
from asmlab.tasks import TaskKind

logger = get_logger(__name__)

EXTENT = 4.0
LIGHT = np.array([-0.3, -0.5, 1.0]) / np.linalg.norm([-0.3, -0.5, 1.0])
AMBIENT = 0.15
SURFACE_CLASSES = 3  # wall, floor, box
BACK_WALL_ID, SIDE_WALL_ID, FLOOR_ID = 1, 2, 3


@dataclass(frozen=True)
class Plane:
    """One planar surface; region is (v0, v1, u0, u1) in scene units or None (unbounded)."""

    d0: float
    gu: float
    gv: float
    instance_id: int
    albedo: float = 0.8
    region: tuple[float, float, float, float] | None = None

    @property
    def normal(self) -> NDArray[np.float64]:
        n = np.array([-self.gu, -self.gv, 1.0])
        return n / np.linalg.norm(n)


@dataclass
class PlanarScene:
    image: NDArray[np.float64]
    depth: NDArray[np.float64]
    normals: NDArray[np.float64]  # 3 x H x W
    instances: NDArray[np.uint8]
    planes: list[Plane]


def instance_class(instance_id: int) -> int:
    """Surface class of a scene instance: 1 wall, 2 floor, 3 box (0 for none)."""
    if instance_id <= 0:
        return 0
    if instance_id in (BACK_WALL_ID, SIDE_WALL_ID):
        return 1
    if instance_id == FLOOR_ID:
        return 2
    return 3


def pixel_coords(size: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """(v, u) scene coordinates of pixel centers."""
    c = (np.arange(size) + 0.5) * EXTENT / size
    vv, uu = np.meshgrid(c, c, indexing="ij")
    return vv, uu


def render_planes(planes: list[Plane], size: int) -> PlanarScene:
    """Z-buffer the planes; ties keep the earlier plane. Every pixel must be covered."""
    vv, uu = pixel_coords(size)
    depth = np.full((size, size), np.inf)
    owner = np.full((size, size), -1, dtype=np.int64)
    for k, plane in enumerate(planes):
        d = plane.d0 + plane.gu * uu + plane.gv * vv
        visible = d < depth
        if plane.region is not None:
            v0, v1, u0, u1 = plane.region
            visible &= (vv >= v0) & (vv < v1) & (uu >= u0) & (uu < u1)
        depth = np.where(visible, d, depth)
        owner = np.where(visible, k, owner)
    if (owner < 0).any():
        raise ConfigurationError("Scene leaves pixels uncovered")
    if (depth <= 0).any():
        raise ConfigurationError("Scene has non-positive depth")

    table = np.stack([p.normal for p in planes])  # P x 3
    normals = np.moveaxis(table[owner], -1, 0)
    albedo = np.array([p.albedo for p in planes])[owner]
    shading = np.clip(np.tensordot(LIGHT, normals, axes=(0, 0)), 0.0, None)
    image = AMBIENT + (1.0 - AMBIENT) * albedo * shading
    ids = np.array([p.instance_id for p in planes], dtype=np.uint8)[owner]
    return PlanarScene(np.clip(image, 0.0, 1.0), depth, normals, ids, list(planes))


def random_room(rng: np.random.Generator, max_boxes: int = 3) -> list[Plane]:
    """Back wall, one side wall, a floor meeting the back wall at a horizon row, boxes."""
    d_back = rng.uniform(6.0, 8.0)
    horizon = rng.uniform(1.5, 2.5)
    slope = rng.uniform(0.6, 1.5)
    wall_edge = rng.uniform(0.5, 1.5)
    wall_slope = rng.uniform(0.6, 2.0)
    left = bool(rng.random() < 0.5)

    planes = [Plane(d_back, 0.0, 0.0, BACK_WALL_ID, rng.uniform(0.6, 0.9))]
    if left:
        # depth = d_back - wall_slope * (wall_edge - u)
        planes.append(
            Plane(d_back - wall_slope * wall_edge, wall_slope, 0.0, SIDE_WALL_ID, 0.7)
        )
    else:
        edge = EXTENT - wall_edge
        planes.append(Plane(d_back + wall_slope * edge, -wall_slope, 0.0, SIDE_WALL_ID, 0.7))
    # depth = d_back - slope * (v - horizon)
    planes.append(Plane(d_back + slope * horizon, 0.0, -slope, FLOOR_ID, rng.uniform(0.5, 0.8)))

    for b in range(int(rng.integers(0, max_boxes + 1))):
        h, w = rng.uniform(0.4, 1.2, size=2)
        v1 = rng.uniform(horizon + h, EXTENT)
        u0 = rng.uniform(0.0, EXTENT - w)
        floor_depth = d_back - slope * (v1 - horizon)
        d_box = max(floor_depth - rng.uniform(0.1, 0.6), 0.5)
        planes.append(
            Plane(
                d_box,
                0.0,
                0.0,
                FLOOR_ID + 1 + b,
                rng.uniform(0.3, 1.0),
                (v1 - h, v1, u0, u0 + w),
            )
        )
    return planes


def _write_sample(
    out_dir: Path, seed: int, index: int, size: int, task: TaskKind
) -> SampleRecord:
    rng = sample_rng(seed, index)
    scene = render_planes(random_room(rng), size)
    image = scene.image + rng.normal(0.0, 0.01, scene.image.shape)
    sample_id = f"s{index:06d}"
    rel = {
        "image": f"samples/{sample_id}_image.pgm",
        "depth": f"samples/{sample_id}_depth.pfm",
        "normal": f"samples/{sample_id}_normal.pfm",
        "instance": f"samples/{sample_id}_instance.pgm",
    }
    write_pgm(out_dir / rel["image"], image_to_pgm(image))
    write_pfm(out_dir / rel["depth"], scene.depth)
    write_pfm(out_dir / rel["normal"], scene.normals)
    write_pgm(out_dir / rel["instance"], scene.instances)
    targets = {
        "depth": (rel["depth"],),
        "normal": (rel["normal"],),
        "joint": (rel["depth"], rel["normal"]),
    }[task]
    return SampleRecord(sample_id, rel["image"], targets, rel["instance"])


def gen_depth_normal_set(
    seed: int,
    n: int,
    size: int,
    out_dir: Path,
    task: TaskKind = "depth",
    val_fraction: float = 0.2,
    workers: int = 1,
) -> DatasetManifest:
    """Generate n room scenes with depth (PFM), normals (PFM) and instance masks.

    Depth and normal maps are always written; task selects which the manifest's
    target column references.

    Raises:
        ConfigurationError: If size < 16, n < 0 or task is segmentation
    """
    if size < 16:
        raise ConfigurationError("size must be >= 16", size=size)
    if n < 0:
        raise ConfigurationError("n must be >= 0", n=n)
    if task not in ("depth", "normal", "joint"):
        raise ConfigurationError(f"Depth/normal scenes cannot serve task {task}", task=task)

    out_dir.mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        records = list(pool.map(lambda i: _write_sample(out_dir, seed, i, size, task), range(n)))
    manifest = DatasetManifest(
        task=task,
        classes=SURFACE_CLASSES,
        records=records,
        params={
            "generator": "rooms",
            "seed": str(seed),
            "size": str(size),
            "val_fraction": str(val_fraction),
        },
        root=out_dir,
    )
    write_manifest(manifest)
    train, val = split_ids(manifest.ids, seed, val_fraction)
    write_split(out_dir, train, val)
    logger.info("dataset_generated", task=task, samples=n, out_dir=str(out_dir))
    return manifest
