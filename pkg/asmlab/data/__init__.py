"""Deterministic synthetic datasets and their on-disk formats."""

from asmlab.data.imageio import (
    decode_pfm,
    decode_pgm,
    encode_pfm,
    encode_pgm,
    read_pfm,
    read_pgm,
    write_pfm,
    write_pgm,
)
from asmlab.data.manifest import (
    Batch,
    DatasetManifest,
    Sample,
    SampleRecord,
    load_samples,
    manifest_checksum,
    read_manifest,
    read_split,
    split_ids,
)
from asmlab.data.scenes import gen_depth_normal_set
from asmlab.data.shapes import gen_segmentation_set

__all__ = [
    "Batch",
    "DatasetManifest",
    "Sample",
    "SampleRecord",
    "decode_pfm",
    "decode_pgm",
    "encode_pfm",
    "encode_pgm",
    "gen_depth_normal_set",
    "gen_segmentation_set",
    "load_samples",
    "manifest_checksum",
    "read_manifest",
    "read_pfm",
    "read_pgm",
    "read_split",
    "split_ids",
    "write_pfm",
    "write_pgm",
]
