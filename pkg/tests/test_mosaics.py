"""Sampling, placement, assembly, and manifest round-trips."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from salbench import (
    CELL_PIXELS,
    DatasetBuildConfig,
    ImageRecord,
    MosaicManifest,
    MosaicSpec,
    assemble_mosaic,
    build_dataset,
    sample_mosaic_spec,
)
from salbench.confusion import cell_of_pixel, quadrant_class
from salbench.errors import InsufficientPoolError, UnknownTargetClassError
from salbench.mosaics import CELL_COORDS, derive_seed, pixel_offset, scan_class_folders

from .conftest import CLASSES, direct_spec, fake_pool


class TestPixelOffset:
    def test_corners(self):
        # (left, top); raster row 0 at the top, cell x counts up from the bottom
        assert pixel_offset(0, 0) == (0, 224)
        assert pixel_offset(0, 1) == (224, 224)
        assert pixel_offset(1, 0) == (0, 0)
        assert pixel_offset(1, 1) == (224, 0)

    def test_small_cells(self):
        assert pixel_offset(0, 1, cell_pixels=2) == (2, 2)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            pixel_offset(2, 0)


class TestSpecInvariants:
    def test_requires_two_target_cells(self):
        layout = {(0, 0): "cat", (1, 0): "dog", (0, 1): "fox", (1, 1): "owl"}
        with pytest.raises(ValueError, match="exactly 2 target"):
            direct_spec(layout=layout, target="cat")

    def test_requires_four_cells(self):
        rec = ImageRecord("cat/00.png", "cat", "/x")
        with pytest.raises(ValueError, match="expected cells"):
            MosaicSpec("m", {(0, 0): rec}, "cat", 0)

    def test_target_coords(self):
        spec = direct_spec()
        assert spec.target_coords() == ((0, 0), (1, 0))


class TestSampling:
    def test_deterministic(self, pool):
        a = sample_mosaic_spec(pool, "cat", "random", 42)
        b = sample_mosaic_spec(pool, "cat", "random", 42)
        assert a == b

    def test_pool_order_irrelevant(self, pool):
        shuffled = list(reversed(pool))
        a = sample_mosaic_spec(pool, "cat", "random", 42, mosaic_id="m")
        b = sample_mosaic_spec(shuffled, "cat", "random", 42, mosaic_id="m")
        assert a == b

    def test_images_distinct_within_mosaic(self, pool):
        for seed in range(50):
            spec = sample_mosaic_spec(pool, "dog", "random", seed)
            ids = [r.image_id for r in spec.cells.values()]
            assert len(set(ids)) == 4

    def test_random_policy_two_distinct_other_classes(self, pool):
        for seed in range(50):
            spec = sample_mosaic_spec(pool, "cat", "random", seed)
            others = {
                r.class_label for r in spec.cells.values() if r.class_label != "cat"
            }
            assert len(others) == 2
            assert "cat" not in others

    def test_fixed_policy(self, pool):
        for seed in range(20):
            spec = sample_mosaic_spec(pool, "cat", "fixed:dog", seed)
            others = [
                r.class_label for r in spec.cells.values() if r.class_label != "cat"
            ]
            assert others == ["dog", "dog"]

    def test_forced_draw_from_minimal_pool(self):
        pool = [
            ImageRecord("tabby/0", "tabby", "/x0"),
            ImageRecord("tabby/1", "tabby", "/x1"),
            ImageRecord("car/0", "car", "/y0"),
            ImageRecord("car/1", "car", "/y1"),
        ]
        spec = sample_mosaic_spec(pool, "tabby", "fixed:car", seed=99)
        assert {r.image_id for r in spec.cells.values()} == {
            "tabby/0", "tabby/1", "car/0", "car/1",
        }

    def test_unknown_target(self, pool):
        with pytest.raises(UnknownTargetClassError):
            sample_mosaic_spec(pool, "zebra", "random", 0)

    def test_insufficient_targets(self):
        pool = fake_pool(per_class=1)
        with pytest.raises(InsufficientPoolError):
            sample_mosaic_spec(pool, "cat", "random", 0)

    def test_insufficient_other_classes(self):
        pool = fake_pool(classes=("cat", "dog"))
        with pytest.raises(InsufficientPoolError):
            sample_mosaic_spec(pool, "cat", "random", 0)

    def test_bad_policy_string(self, pool):
        with pytest.raises(ValueError, match="policy"):
            sample_mosaic_spec(pool, "cat", "often", 0)

    def test_placements_uniform(self, pool):
        # 6 distinguishable target-pair position sets, expect 1/6 each
        counts: dict[tuple, int] = {}
        n = 3000
        for seed in range(n):
            spec = sample_mosaic_spec(pool, "cat", "random", seed)
            counts[spec.target_coords()] = counts.get(spec.target_coords(), 0) + 1
        assert len(counts) == 6
        for k, c in counts.items():
            assert abs(c / n - 1 / 6) < 0.02, (k, c)


class TestAssembly:
    def solid_loader(self, spec: MosaicSpec):
        """One distinct solid color per cell image; returns (loader, colors)."""
        palette = [(255, 0, 0), (0, 255, 0), (0, 0, 255), (255, 255, 0)]
        colors = {
            rec.image_id: palette[i]
            for i, rec in enumerate(spec.cells[c] for c in CELL_COORDS)
        }

        def load(rec: ImageRecord) -> Image.Image:
            return Image.new("RGB", (50, 50), colors[rec.image_id])

        return load, colors

    def test_orientation_loop_closure(self):
        # the rendered pixel under any coordinate must come from the very
        # cell that quadrant_class attributes that coordinate to
        layout = {(0, 0): "cat", (1, 0): "dog", (0, 1): "cat", (1, 1): "fox"}
        spec = direct_spec(layout=layout, target="cat")
        load, colors = self.solid_loader(spec)
        img = assemble_mosaic(spec, loader=load)
        assert img.size == (448, 448)
        arr = np.asarray(img)
        for row, col in [(0, 0), (0, 447), (447, 0), (447, 447), (100, 300), (300, 100)]:
            cell = cell_of_pixel(row, col)
            rec = spec.cells[cell]
            assert tuple(arr[row, col]) == colors[rec.image_id], (row, col)
            assert quadrant_class(spec, row, col) == rec.class_label

    def test_quadrants_are_uniform(self):
        spec = direct_spec()
        load, colors = self.solid_loader(spec)
        arr = np.asarray(assemble_mosaic(spec, loader=load))
        for x, y in CELL_COORDS:
            left, top = pixel_offset(x, y)
            block = arr[top : top + 224, left : left + 224]
            assert (block == colors[spec.cells[(x, y)].image_id]).all()

    def test_cell_sized_input_pasted_bit_identically(self):
        rng = np.random.default_rng(5)
        tiles = {
            c: rng.integers(0, 256, (CELL_PIXELS, CELL_PIXELS, 3), dtype=np.uint8)
            for c in ("cat", "dog", "fox")
        }
        tiles["cat2"] = rng.integers(0, 256, (CELL_PIXELS, CELL_PIXELS, 3), dtype=np.uint8)

        counter = {"cat": 0}

        def load(rec: ImageRecord) -> Image.Image:
            if rec.class_label == "cat":
                key = "cat" if counter["cat"] == 0 else "cat2"
                counter["cat"] += 1
                return Image.fromarray(tiles[key])
            return Image.fromarray(tiles[rec.class_label])

        layout = {(0, 0): "dog", (1, 0): "fox", (0, 1): "cat", (1, 1): "cat"}
        spec = direct_spec(layout=layout)
        arr = np.asarray(assemble_mosaic(spec, loader=load))
        left, top = pixel_offset(0, 0)
        assert (arr[top : top + 224, left : left + 224] == tiles["dog"]).all()
        left, top = pixel_offset(1, 0)
        assert (arr[top : top + 224, left : left + 224] == tiles["fox"]).all()

    def test_marker_pixels_land_in_spec_quadrants(self):
        # single marked pixel per 224px source: marker must appear at the
        # cell's offset corner
        def load(rec: ImageRecord) -> Image.Image:
            arr = np.zeros((CELL_PIXELS, CELL_PIXELS, 3), dtype=np.uint8)
            arr[0, 0] = (255, 255, 255)
            return Image.fromarray(arr)

        spec = direct_spec()
        arr = np.asarray(assemble_mosaic(spec, loader=load))
        marks = {tuple(p) for p in np.argwhere((arr == 255).all(axis=2))}
        expected = set()
        for x, y in CELL_COORDS:
            left, top = pixel_offset(x, y)
            expected.add((top, left))
        assert marks == expected

    def test_loader_failure_carries_image_id(self):
        def load(rec: ImageRecord) -> Image.Image:
            raise OSError("decode went sideways")

        spec = direct_spec()
        from salbench.errors import AssemblyError

        with pytest.raises(AssemblyError) as err:
            assemble_mosaic(spec, loader=load)
        assert err.value.image_id is not None


class TestManifest:
    def test_json_round_trip(self):
        from .conftest import sampled_specs

        manifest = MosaicManifest(
            dataset_name="toy", mosaics=tuple(sampled_specs(5)), global_seed=7
        )
        again = MosaicManifest.from_json(manifest.to_json())
        assert again == manifest

    def test_json_is_stable(self):
        from .conftest import sampled_specs

        manifest = MosaicManifest(
            dataset_name="toy", mosaics=tuple(sampled_specs(3)), global_seed=7
        )
        assert manifest.to_json() == manifest.to_json()
        assert manifest.to_json().endswith("\n")

    def test_cell_serialization_shape(self):
        manifest = MosaicManifest(
            dataset_name="toy", mosaics=(direct_spec(),), global_seed=0
        )
        import json

        doc = json.loads(manifest.to_json())
        cell = doc["mosaics"][0]["cells"][0]
        assert set(cell) == {"x", "y", "image_id", "class_label", "source_path"}
        assert cell["x"] in (0, 1) and cell["y"] in (0, 1)

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError, match="unique"):
            MosaicManifest(
                dataset_name="toy",
                mosaics=(direct_spec(mosaic_id="m"), direct_spec(mosaic_id="m")),
                global_seed=0,
            )

    def test_pixel_consistency_enforced(self):
        with pytest.raises(ValueError, match="2 \\* cell_pixels"):
            MosaicManifest(
                dataset_name="toy", mosaics=(), global_seed=0,
                cell_pixels=224, mosaic_pixels=400,
            )


class TestBuildDataset:
    def test_build_writes_rasters_and_manifest(self, class_tree, tmp_path):
        out = tmp_path / "out"
        config = DatasetBuildConfig(
            classes_dir=str(class_tree),
            out_dir=str(out),
            targets={"cat": 3, "dog": 2},
            other_class_policy="random",
            seed=11,
        )
        manifest = build_dataset(config)
        assert len(manifest.mosaics) == 5
        assert (out / "manifest.json").exists()
        pngs = sorted(p.name for p in out.glob("*.png"))
        assert len(pngs) == 5
        reloaded = MosaicManifest.load(out / "manifest.json")
        assert reloaded == manifest
        img = Image.open(out / f"{manifest.mosaics[0].mosaic_id}.png")
        assert img.size == (448, 448)

    def test_zero_mosaics_writes_nothing(self, class_tree, tmp_path):
        out = tmp_path / "none"
        config = DatasetBuildConfig(
            classes_dir=str(class_tree),
            out_dir=str(out),
            targets={},
            other_class_policy="random",
            seed=0,
        )
        manifest = build_dataset(config)
        assert manifest.mosaics == ()
        assert not out.exists()

    def test_rebuild_manifest_byte_identical(self, class_tree, tmp_path):
        texts = []
        for name in ("a", "b"):
            out = tmp_path / name
            config = DatasetBuildConfig(
                classes_dir=str(class_tree),
                out_dir=str(out),
                targets={"fox": 4},
                other_class_policy="random",
                seed=3,
            )
            build_dataset(config)
            texts.append((out / "manifest.json").read_bytes())
        assert texts[0] == texts[1]

    def test_scan_class_folders(self, class_tree):
        pool = scan_class_folders(class_tree)
        assert len(pool) == 16
        assert {r.class_label for r in pool} == set(CLASSES[:4])
        assert all(r.image_id.startswith(r.class_label + "/") for r in pool)


class TestDeriveSeed:
    def test_distinct_streams(self):
        seen = {derive_seed(0, "d", "cat", str(i)) for i in range(100)}
        assert len(seen) == 100

    def test_stable_value(self):
        # frozen: platform-independent stream derivation
        assert derive_seed(0, "x") == derive_seed(0, "x")
        assert derive_seed(0, "x") != derive_seed(1, "x")

    @given(st.integers(min_value=0, max_value=2**64 - 1), st.text(max_size=20))
    @settings(max_examples=40)
    def test_range(self, seed, tag):
        v = derive_seed(seed, tag)
        assert 0 <= v < 2**64
