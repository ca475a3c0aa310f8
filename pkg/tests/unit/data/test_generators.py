"""Tests for the segmentation and room-scene generators."""

import math

import numpy as np
import pytest

from asmlab.data.imageio import read_pfm, read_pgm
from asmlab.data.manifest import load_samples, manifest_checksum, read_manifest
from asmlab.data.scenes import (
    SURFACE_CLASSES,
    Plane,
    gen_depth_normal_set,
    instance_class,
    random_room,
    render_planes,
)
from asmlab.data.shapes import (
    gen_segmentation_set,
    rasterize,
    render_segmentation_scene,
    sample_rng,
)
from asmlab.exceptions import ConfigurationError


class TestSegmentationSet:
    """Tests for gen_segmentation_set."""

    def test_same_seed_same_bytes(self, tmp_path):
        a = gen_segmentation_set(5, 4, 16, 3, 0, tmp_path / "a")
        b = gen_segmentation_set(5, 4, 16, 3, 0, tmp_path / "b")
        assert manifest_checksum(a) == manifest_checksum(b)
        for rel in ("samples/s000002_image.pgm", "samples/s000002_mask.pgm", "val.txt"):
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()

    def test_worker_count_does_not_change_output(self, tmp_path):
        a = gen_segmentation_set(5, 6, 16, 3, 1, tmp_path / "a", workers=1)
        b = gen_segmentation_set(5, 6, 16, 3, 1, tmp_path / "b", workers=3)
        assert manifest_checksum(a) == manifest_checksum(b)

    def test_different_seed_differs(self, tmp_path):
        a = gen_segmentation_set(1, 3, 16, 3, 0, tmp_path / "a")
        b = gen_segmentation_set(2, 3, 16, 3, 0, tmp_path / "b")
        assert manifest_checksum(a) != manifest_checksum(b)

    def test_empty_set(self, tmp_path):
        manifest = gen_segmentation_set(0, 0, 16, 4, 0, tmp_path / "empty")
        reread = read_manifest(tmp_path / "empty")
        assert reread.records == []
        assert reread.task == "segmentation"
        assert len(load_samples(manifest)) == 0

    def test_class_ids_below_class_count(self, seg_set):
        batch = load_samples(seg_set)
        mask = batch.targets["target"]
        assert mask.min() >= 0 and mask.max() < 4
        assert batch.images.shape == (10, 1, 16, 16)

    def test_instances_inside_foreground(self, seg_set):
        """Instance pixels are exactly the foreground pixels."""
        batch = load_samples(seg_set)
        np.testing.assert_array_equal(batch.instances > 0, batch.targets["target"] > 0)

    def test_each_instance_has_one_class(self, seg_set):
        batch = load_samples(seg_set)
        for mask, inst in zip(batch.targets["target"], batch.instances):
            for k in np.unique(inst[inst > 0]):
                assert len(np.unique(mask[inst == k])) == 1

    def test_disc_area(self):
        """A lone disc covers its analytic area within one pixel ring."""
        for index in range(20):
            scene = render_segmentation_scene(sample_rng(11, index), 64, classes=2)
            (obj,) = scene.objects
            assert obj.kind == "disc"
            r = obj.params["r"]
            count = int((scene.mask == 1).sum())
            assert abs(count - math.pi * r * r) <= math.pi * (2 * r + 1)

    def test_rasterized_rectangle(self):
        region = rasterize("rectangle", {"y0": 2.0, "x0": 3.0, "h": 4.0, "w": 5.0}, 16)
        assert region.sum() == 20

    @pytest.mark.parametrize(
        "kwargs",
        [{"size": 8}, {"classes": 1}, {"n": -1}, {"clutter_level": -1}, {"clutter_level": 254}],
    )
    def test_invalid_parameters(self, tmp_path, kwargs):
        params = {"seed": 0, "n": 2, "size": 16, "classes": 3, "clutter_level": 0}
        params.update(kwargs)
        with pytest.raises(ConfigurationError):
            gen_segmentation_set(out_dir=tmp_path / "bad", **params)


class TestPlanarScenes:
    """Tests for analytic depth and normals."""

    def test_fronto_parallel_plane(self):
        scene = render_planes([Plane(5.0, 0.0, 0.0, 1)], 16)
        assert (scene.depth == 5.0).all()
        np.testing.assert_array_equal(scene.normals[:, 3, 4], [0.0, 0.0, 1.0])
        assert (scene.normals[2] == 1.0).all()

    def test_normal_edge_at_known_row(self):
        """Two planes split at v = 2 change normal exactly between rows 7 and 8 of 16."""
        upper = Plane(5.0, 0.0, 0.0, 1, region=(0.0, 2.0, 0.0, 4.0))
        lower = Plane(6.0, 0.0, -0.5, 2, region=(2.0, 4.0, 0.0, 4.0))
        scene = render_planes([upper, lower], 16)
        np.testing.assert_allclose(
            scene.normals[:, :8, :], np.broadcast_to(upper.normal[:, None, None], (3, 8, 16))
        )
        expected = np.broadcast_to(lower.normal[:, None, None], (3, 8, 16))
        np.testing.assert_allclose(scene.normals[:, 8:, :], expected)
        assert not np.allclose(upper.normal, lower.normal)

    def test_uncovered_pixels_rejected(self):
        with pytest.raises(ConfigurationError):
            render_planes([Plane(5.0, 0.0, 0.0, 1, region=(0.0, 1.0, 0.0, 1.0))], 16)

    def test_random_rooms_are_valid(self):
        """Unit normals, positive depth and surface classes on random rooms."""
        for index in range(10):
            scene = render_planes(random_room(sample_rng(4, index)), 32)
            norms = np.sqrt((scene.normals**2).sum(axis=0))
            assert np.abs(norms - 1.0).max() <= 1e-9
            assert (scene.depth > 0).all()
            classes = {instance_class(int(i)) for i in np.unique(scene.instances)}
            assert classes <= {1, 2, 3}

    def test_joint_manifest_lists_both_maps(self, joint_set):
        assert joint_set.classes == SURFACE_CLASSES
        record = joint_set.records[0]
        assert record.targets[0].endswith("_depth.pfm")
        assert record.targets[1].endswith("_normal.pfm")
        batch = load_samples(joint_set)
        assert batch.targets["depth"].shape == (6, 1, 16, 16)
        assert batch.targets["normal"].shape == (6, 3, 16, 16)

    def test_stored_normals_stay_unit_length(self, joint_set):
        """float32 storage keeps normals unit length to single precision."""
        normals = read_pfm(joint_set.root / joint_set.records[0].targets[1])
        np.testing.assert_allclose(np.sqrt((normals**2).sum(axis=0)), 1.0, atol=1e-6)

    def test_instance_mask_written(self, joint_set):
        inst = read_pgm(joint_set.root / joint_set.records[0].instance)
        assert inst.shape == (16, 16)
        assert inst.min() >= 1

    def test_segmentation_task_rejected(self, tmp_path):
        with pytest.raises(ConfigurationError):
            gen_depth_normal_set(0, 1, 16, tmp_path, task="segmentation")
