"""Shared fixtures: fake pools, direct spec construction, tiny image trees."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from PIL import Image

from salbench import ImageRecord, MosaicSpec
from salbench.mosaics import CELL_COORDS, derive_seed, sample_mosaic_spec

settings.register_profile(
    "suite",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

CLASSES = ("cat", "dog", "fox", "owl", "ray", "bee")


def fake_pool(classes=CLASSES, per_class: int = 6) -> list[ImageRecord]:
    """Records with fabricated paths; fine for everything but rendering."""
    return [
        ImageRecord(
            image_id=f"{c}/{i:02d}.png",
            class_label=c,
            source_path=f"/nonexistent/{c}/{i:02d}.png",
        )
        for c in classes
        for i in range(per_class)
    ]


def direct_spec(
    layout: dict[tuple[int, int], str] | None = None,
    target: str = "cat",
    mosaic_id: str = "m0",
) -> MosaicSpec:
    """Spec with an explicit cell->class layout, default cats in the left column."""
    if layout is None:
        layout = {(0, 0): "cat", (1, 0): "cat", (0, 1): "dog", (1, 1): "fox"}
    counter: dict[str, int] = {}
    cells = {}
    for coord in CELL_COORDS:
        label = layout[coord]
        n = counter.get(label, 0)
        counter[label] = n + 1
        cells[coord] = ImageRecord(
            image_id=f"{label}/{n:02d}.png",
            class_label=label,
            source_path=f"/nonexistent/{label}/{n:02d}.png",
        )
    return MosaicSpec(mosaic_id=mosaic_id, cells=cells, target_class=target, rng_seed=0)


def sampled_specs(n: int, seed: int = 0, target: str = "cat") -> list[MosaicSpec]:
    pool = fake_pool()
    return [
        sample_mosaic_spec(
            pool, target, "random", derive_seed(seed, target, str(i)),
            mosaic_id=f"m{i:04d}",
        )
        for i in range(n)
    ]


@pytest.fixture
def pool() -> list[ImageRecord]:
    return fake_pool()


@pytest.fixture
def class_tree(tmp_path):
    """Folder-per-class tree of small solid-color PNGs; returns its root."""
    rng = np.random.default_rng(1234)
    root = tmp_path / "classes"
    for c in CLASSES[:4]:
        d = root / c
        d.mkdir(parents=True)
        for i in range(4):
            color = tuple(int(v) for v in rng.integers(0, 256, 3))
            Image.new("RGB", (16, 16), color).save(d / f"{i:02d}.png")
    return root
