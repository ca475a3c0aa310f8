"""Tests for manifests, splits and checksums."""

import pytest

from asmlab.data.manifest import (
    MANIFEST_NAME,
    load_samples,
    manifest_checksum,
    parse_manifest,
    read_manifest,
    read_split,
    split_ids,
)
from asmlab.exceptions import DataError, FileError, FormatError


class TestManifest:
    """Tests for manifest reading and parsing."""

    def test_read_directory_or_file(self, seg_set):
        by_dir = read_manifest(seg_set.root)
        by_file = read_manifest(seg_set.root / MANIFEST_NAME)
        assert by_dir.ids == by_file.ids == seg_set.ids

    def test_generator_parameters_recorded(self, seg_set):
        params = read_manifest(seg_set.root).params
        assert params["seed"] == "7"
        assert params["generator"] == "segmentation"

    def test_bad_header(self):
        with pytest.raises(FormatError):
            parse_manifest("NOTADATASET seg 4\n")

    def test_unknown_task_in_header(self):
        with pytest.raises(FormatError):
            parse_manifest("ASMDATA1 optical-flow 4\n")

    def test_joint_needs_two_targets(self):
        with pytest.raises(FormatError):
            parse_manifest("ASMDATA1 joint 3\na\timg.pgm\tdepth.pfm\tinst.pgm\n")

    def test_duplicate_id(self):
        line = "a\timg.pgm\tmask.pgm\tinst.pgm\n"
        with pytest.raises(FormatError, match="duplicate"):
            parse_manifest("ASMDATA1 seg 4\n" + line + line)

    def test_missing_referenced_file(self, seg_set):
        (seg_set.root / seg_set.records[0].image).unlink()
        with pytest.raises(FileError):
            read_manifest(seg_set.root)

    def test_checksum_tracks_file_bytes(self, seg_set):
        before = manifest_checksum(seg_set)
        path = seg_set.root / seg_set.records[-1].image
        data = bytearray(path.read_bytes())
        data[-1] ^= 0xFF
        path.write_bytes(bytes(data))
        assert manifest_checksum(seg_set) != before

    def test_unknown_sample_id(self, seg_set):
        with pytest.raises(DataError):
            load_samples(seg_set, ["nope"])


class TestSplits:
    """Tests for the seeded train/val split."""

    def test_disjoint_and_complete(self, seg_set):
        train = read_split(seg_set, "train")
        val = read_split(seg_set, "val")
        assert not set(train) & set(val)
        assert sorted(train + val) == sorted(seg_set.ids)
        assert len(val) == 2

    def test_all_split(self, seg_set):
        assert read_split(seg_set, "all") == seg_set.ids

    def test_seeded(self):
        ids = [f"s{i}" for i in range(50)]
        assert split_ids(ids, 3) == split_ids(ids, 3)
        assert split_ids(ids, 3) != split_ids(ids, 4)

    def test_keeps_manifest_order(self):
        ids = [f"s{i:02d}" for i in range(20)]
        train, val = split_ids(ids, 0, 0.25)
        assert train == sorted(train) and val == sorted(val)
        assert len(val) == 5

    def test_missing_split_files(self, seg_set):
        """Without split files every sample trains and validation is empty."""
        (seg_set.root / "train.txt").unlink()
        (seg_set.root / "val.txt").unlink()
        assert read_split(seg_set, "train") == seg_set.ids
        assert read_split(seg_set, "val") == []

    def test_unknown_split(self, seg_set):
        with pytest.raises(DataError):
            read_split(seg_set, "test")

    def test_bad_fraction(self):
        with pytest.raises(DataError):
            split_ids(["a"], 0, 1.0)
