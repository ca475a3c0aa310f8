"""Analyzer introspection: the input patches that most excite one filter."""

from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from asmlab.data.imageio import image_to_pgm, write_pgm, write_text
from asmlab.engine.tensor import Tensor
from asmlab.exceptions import UsageError
from asmlab.logging_config import get_logger
from asmlab.nets.network import Network, forward_with_taps
from asmlab.nets.spec import NetworkSpec

logger = get_logger(__name__)

CHUNK = 16
MONTAGE_COLUMNS = 5


@dataclass(frozen=True)
class FieldGeometry:
    """Receptive field of one layer position in input pixels.

    Position i of the layer is centered at offset + i * jump in input coordinates
    and sees a window of extent input pixels.
    """

    extent: float
    jump: float
    offset: float


@dataclass
class Stimulus:
    sample: int
    row: int
    col: int
    activation: float
    box: tuple[int, int, int, int]  # r0, c0, r1, c1 (exclusive), clipped to the image
    patch: NDArray[np.float64] = field(repr=False)


@dataclass
class StimuliResult:
    layer: str
    filter_idx: int
    stimuli: list[Stimulus]
    requested: int

    @property
    def truncated(self) -> bool:
        return len(self.stimuli) < self.requested


def receptive_fields(spec: NetworkSpec) -> dict[str, FieldGeometry]:
    """Per-layer receptive-field geometry.

    Concatenated sources contribute their largest field; upsampled sources are
    mapped back through half-pixel-center sampling.
    """
    geo = {name: FieldGeometry(1.0, 1.0, 0.0) for name in spec.input_names}
    for layer in spec.layers:
        sources = [geo[c] for c in layer.connections]
        first = sources[0]
        if layer.upsample and len(layer.connections) > 1:
            factor = max(first.jump / sources[1].jump, 1.0)
        elif layer.upsample and layer.is_head:
            factor = first.jump
        elif layer.upsample:
            factor = 2.0
        else:
            factor = 1.0
        if factor > 1:
            first = FieldGeometry(
                first.extent + first.jump,
                first.jump / factor,
                first.offset + first.jump * (0.5 / factor - 0.5),
            )
        extent = max([first.extent, *(s.extent for s in sources[1:])])
        jump, offset = first.jump, first.offset
        for j in range(layer.repeat):
            extent += (layer.kernel - 1) * jump
            if j == 0:
                jump *= layer.stride
        geo[layer.name] = FieldGeometry(extent, jump, offset)
    return geo


def _display_image(inputs: Mapping[str, Tensor]) -> NDArray[np.float64]:
    """N x H x W grayscale rendering of the first analyzer input."""
    values = next(iter(inputs.values())).values
    if values.shape[1] > 1:
        return np.argmax(values, axis=1) / (values.shape[1] - 1)
    lo, hi = values.min(), values.max()
    return (values[:, 0] - lo) / (hi - lo) if hi > lo else np.zeros(values[:, 0].shape)


def _box(geom: FieldGeometry, row: int, col: int, h: int, w: int) -> tuple[int, int, int, int]:
    half = geom.extent / 2.0
    cy, cx = geom.offset + row * geom.jump, geom.offset + col * geom.jump
    r0 = int(np.floor(cy + 0.5 - half))
    c0 = int(np.floor(cx + 0.5 - half))
    size = int(np.ceil(geom.extent))
    return max(r0, 0), max(c0, 0), min(r0 + size, h), min(c0 + size, w)


def _overlaps(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> bool:
    return a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]


def _crop(image: NDArray[np.float64], geom: FieldGeometry, row: int, col: int) -> NDArray:
    """Fixed-size patch around the field center, zero outside the image."""
    size = int(np.ceil(geom.extent))
    half = geom.extent / 2.0
    r0 = int(np.floor(geom.offset + row * geom.jump + 0.5 - half))
    c0 = int(np.floor(geom.offset + col * geom.jump + 0.5 - half))
    patch = np.zeros((size, size))
    h, w = image.shape
    rs, cs = max(r0, 0), max(c0, 0)
    re, ce = min(r0 + size, h), min(c0 + size, w)
    if rs < re and cs < ce:
        patch[rs - r0 : re - r0, cs - c0 : ce - c0] = image[rs:re, cs:ce]
    return patch


def filter_activations(
    analyzer: Network,
    inputs: Tensor | Mapping[str, Tensor],
    layer: str,
    filter_idx: int,
) -> NDArray[np.float64]:
    """N x H' x W' activations of one filter, evaluated in chunks without a tape."""
    named = inputs if isinstance(inputs, Mapping) else {analyzer.spec.input_names[0]: inputs}
    n = next(iter(named.values())).shape[0]
    maps = []
    for start in range(0, n, CHUNK):
        chunk = {name: Tensor(t.values[start : start + CHUNK]) for name, t in named.items()}
        _, taps = forward_with_taps(analyzer, chunk, taps=(layer,))
        maps.append(taps[layer].values[:, filter_idx])
    return np.concatenate(maps, axis=0)


def top_stimuli(
    analyzer: Network,
    inputs: Tensor | Mapping[str, Tensor],
    layer: str,
    filter_idx: int,
    k: int,
) -> StimuliResult:
    """Rank every spatial position by the filter's activation and keep the top k.

    Ties resolve in (sample, row, col) order. Picks within one sample never share
    input pixels; when fewer than k positions qualify the result is truncated.

    Raises:
        UsageError: On an unknown layer, filter index out of range or k < 0
    """
    spec = analyzer.spec
    if layer not in spec.layer_names:
        raise UsageError(f"Unknown layer: {layer}", layer=layer, network=spec.name)
    channels = spec.layer(layer).channels
    if not 0 <= filter_idx < channels:
        raise UsageError(
            f"Filter {filter_idx} out of range for layer {layer}",
            layer=layer,
            filter=filter_idx,
            channels=channels,
        )
    if k < 0:
        raise UsageError("k must be >= 0", k=k)
    if k == 0:
        return StimuliResult(layer, filter_idx, [], 0)

    named = inputs if isinstance(inputs, Mapping) else {spec.input_names[0]: inputs}
    if next(iter(named.values())).shape[0] == 0:
        return StimuliResult(layer, filter_idx, [], k)
    acts = filter_activations(analyzer, named, layer, filter_idx)
    display = _display_image(named)
    geom = receptive_fields(spec)[layer]
    h, w = display.shape[1:]

    samples, rows, cols = np.indices(acts.shape).reshape(3, -1)
    flat = acts.reshape(-1)
    order = np.lexsort((cols, rows, samples, -flat))

    chosen: list[Stimulus] = []
    taken: dict[int, list[tuple[int, int, int, int]]] = {}
    for idx in order:
        s, r, c = int(samples[idx]), int(rows[idx]), int(cols[idx])
        box = _box(geom, r, c, h, w)
        if any(_overlaps(box, other) for other in taken.get(s, [])):
            continue
        taken.setdefault(s, []).append(box)
        chosen.append(Stimulus(s, r, c, float(flat[idx]), box, _crop(display[s], geom, r, c)))
        if len(chosen) == k:
            break

    result = StimuliResult(layer, filter_idx, chosen, k)
    if result.truncated:
        logger.warning("top_stimuli_truncated", layer=layer, requested=k, found=len(chosen))
    return result


def montage(stimuli: list[Stimulus], columns: int = MONTAGE_COLUMNS) -> NDArray[np.float64]:
    """Tile patches left-to-right, top-to-bottom with one-pixel white separators."""
    if not stimuli:
        return np.zeros((1, 1))
    size = stimuli[0].patch.shape[0]
    cols = min(columns, len(stimuli))
    rows = -(-len(stimuli) // cols)
    out = np.ones((rows * (size + 1) - 1, cols * (size + 1) - 1))
    for i, stim in enumerate(stimuli):
        r, c = divmod(i, cols)
        out[r * (size + 1) : r * (size + 1) + size, c * (size + 1) : c * (size + 1) + size] = (
            stim.patch
        )
    return out


def write_stimuli(result: StimuliResult, out_dir: Path) -> tuple[Path, Path]:
    """Write montage.pgm and ranking.csv; returns both paths."""
    montage_path = out_dir / "montage.pgm"
    write_pgm(montage_path, image_to_pgm(montage(result.stimuli)))
    ranking_path = out_dir / "ranking.csv"
    lines = ["rank,sample,row,col,activation,r0,c0,r1,c1"]
    for rank, stim in enumerate(result.stimuli, start=1):
        lines.append(
            f"{rank},{stim.sample},{stim.row},{stim.col},{stim.activation!r},"
            + ",".join(str(v) for v in stim.box)
        )
    write_text(ranking_path, "\n".join(lines) + "\n")
    logger.info(
        "top_stimuli_written",
        layer=result.layer,
        filter=result.filter_idx,
        patches=len(result.stimuli),
        out_dir=str(out_dir),
    )
    return montage_path, ranking_path
