"""Sampling and assembly of 2x2 image mosaics.

A mosaic is a 448x448 composite of four 224x224 images: two drawn from
the target class and two from other classes, arranged in uniformly
random grid positions. Cell coordinates (x, y) follow the bottom-left
convention: x is the vertical index counted upward from the bottom row,
y the horizontal index counted from the left column, both in {0, 1}.
Raster rows count downward from the top, so cell (0, 0) covers the
bottom-left pixel quadrant.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
from PIL import Image

from .errors import AssemblyError, InsufficientPoolError, UnknownTargetClassError

CELL_PIXELS = 224
MOSAIC_PIXELS = 448

#: Canonical cell coordinates, in the order cells are serialized.
CELL_COORDS: tuple[tuple[int, int], ...] = ((0, 0), (0, 1), (1, 0), (1, 1))

POLICY_RANDOM = "random"

IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp", ".webp"}


def pixel_offset(x: int, y: int, cell_pixels: int = CELL_PIXELS) -> tuple[int, int]:
    """(left, top) pixel offset of cell (x, y) in the assembled raster."""
    if x not in (0, 1) or y not in (0, 1):
        raise ValueError(f"cell coordinates must be in {{0,1}}, got ({x}, {y})")
    return cell_pixels * y, cell_pixels * (1 - x)


@dataclass(frozen=True)
class ImageRecord:
    """One labeled source image in the sampling pool."""

    image_id: str
    class_label: str
    source_path: str

    def __post_init__(self):
        if not self.class_label:
            raise ValueError("class_label must be non-empty")


@dataclass(frozen=True)
class MosaicSpec:
    """Which image occupies which cell, and which class is explained."""

    mosaic_id: str
    cells: Mapping[tuple[int, int], ImageRecord]
    target_class: str
    rng_seed: int

    def __post_init__(self):
        if set(self.cells) != set(CELL_COORDS):
            raise ValueError(f"expected cells at {CELL_COORDS}, got {sorted(self.cells)}")
        n_target = sum(1 for r in self.cells.values() if r.class_label == self.target_class)
        if n_target != 2:
            raise ValueError(f"expected exactly 2 target-class cells, got {n_target}")

    def cell(self, x: int, y: int) -> ImageRecord:
        return self.cells[(x, y)]

    def target_coords(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            c for c in CELL_COORDS if self.cells[c].class_label == self.target_class
        )


@dataclass(frozen=True)
class MosaicManifest:
    """Everything needed to recompute confusion tallies without the rasters."""

    dataset_name: str
    mosaics: tuple[MosaicSpec, ...]
    global_seed: int
    cell_pixels: int = CELL_PIXELS
    mosaic_pixels: int = MOSAIC_PIXELS

    def __post_init__(self):
        if self.mosaic_pixels != 2 * self.cell_pixels:
            raise ValueError("mosaic_pixels must equal 2 * cell_pixels")
        ids = [m.mosaic_id for m in self.mosaics]
        if len(ids) != len(set(ids)):
            raise ValueError("mosaic_ids must be unique")

    def spec_by_id(self) -> dict[str, MosaicSpec]:
        return {m.mosaic_id: m for m in self.mosaics}

    def to_json(self) -> str:
        doc = {
            "dataset_name": self.dataset_name,
            "global_seed": self.global_seed,
            "cell_pixels": self.cell_pixels,
            "mosaic_pixels": self.mosaic_pixels,
            "mosaics": [
                {
                    "mosaic_id": m.mosaic_id,
                    "target_class": m.target_class,
                    "rng_seed": m.rng_seed,
                    "cells": [
                        {
                            "x": x,
                            "y": y,
                            "image_id": rec.image_id,
                            "class_label": rec.class_label,
                            "source_path": rec.source_path,
                        }
                        for (x, y), rec in sorted(m.cells.items())
                    ],
                }
                for m in self.mosaics
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "MosaicManifest":
        doc = json.loads(text)
        mosaics = tuple(
            MosaicSpec(
                mosaic_id=m["mosaic_id"],
                target_class=m["target_class"],
                rng_seed=m["rng_seed"],
                cells={
                    (c["x"], c["y"]): ImageRecord(
                        image_id=c["image_id"],
                        class_label=c["class_label"],
                        source_path=c["source_path"],
                    )
                    for c in m["cells"]
                },
            )
            for m in doc["mosaics"]
        )
        return cls(
            dataset_name=doc["dataset_name"],
            mosaics=mosaics,
            global_seed=doc["global_seed"],
            cell_pixels=doc["cell_pixels"],
            mosaic_pixels=doc["mosaic_pixels"],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "MosaicManifest":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def parse_policy(policy: str) -> tuple[str, str | None]:
    """Split an other-class policy string into (kind, fixed_class)."""
    if policy == POLICY_RANDOM:
        return POLICY_RANDOM, None
    if policy.startswith("fixed:"):
        name = policy.split(":", 1)[1]
        if not name:
            raise ValueError("fixed policy needs a class name, e.g. 'fixed:sports car'")
        return "fixed", name
    raise ValueError(f"unknown other-class policy {policy!r}; use 'random' or 'fixed:<class>'")


def sample_mosaic_spec(
    pool: Sequence[ImageRecord],
    target_class: str,
    other_class_policy: str,
    seed: int,
    mosaic_id: str | None = None,
) -> MosaicSpec:
    """Draw one mosaic spec from the pool, fully determined by ``seed``.

    Two images come from ``target_class`` and two from other classes:
    with policy ``"fixed:<class>"`` both from that class, with
    ``"random"`` one image from each of two distinct non-target classes.
    All draws are without replacement and the four images land in a
    uniformly random permutation of the grid cells. Candidates are
    ordered by image_id first, so the draw depends on the pool as a set.
    """
    kind, fixed_class = parse_policy(other_class_policy)
    rng = np.random.default_rng(np.uint64(seed))

    by_class: dict[str, list[ImageRecord]] = {}
    for rec in sorted(pool, key=lambda r: r.image_id):
        by_class.setdefault(rec.class_label, []).append(rec)

    if target_class not in by_class:
        raise UnknownTargetClassError(f"no images labeled {target_class!r} in pool")
    targets = by_class[target_class]
    if len(targets) < 2:
        raise InsufficientPoolError(
            f"need 2 images of {target_class!r}, pool has {len(targets)}"
        )
    t_idx = rng.choice(len(targets), size=2, replace=False)
    chosen = [targets[i] for i in t_idx]

    if kind == "fixed":
        if fixed_class == target_class:
            raise ValueError("fixed other class must differ from the target class")
        others = by_class.get(fixed_class)
        if others is None:
            raise UnknownTargetClassError(f"no images labeled {fixed_class!r} in pool")
        if len(others) < 2:
            raise InsufficientPoolError(
                f"need 2 images of {fixed_class!r}, pool has {len(others)}"
            )
        o_idx = rng.choice(len(others), size=2, replace=False)
        chosen += [others[i] for i in o_idx]
    else:
        other_classes = sorted(c for c in by_class if c != target_class)
        if len(other_classes) < 2:
            raise InsufficientPoolError(
                "random policy needs at least 2 distinct non-target classes, "
                f"pool has {len(other_classes)}"
            )
        c_idx = rng.choice(len(other_classes), size=2, replace=False)
        for i in c_idx:
            cands = by_class[other_classes[i]]
            chosen.append(cands[rng.integers(len(cands))])

    perm = rng.permutation(4)
    cells = {CELL_COORDS[int(p)]: chosen[i] for i, p in enumerate(perm)}
    if mosaic_id is None:
        mosaic_id = f"mosaic-{np.uint64(seed):016x}"
    return MosaicSpec(
        mosaic_id=mosaic_id, cells=cells, target_class=target_class, rng_seed=int(seed)
    )


def default_loader(record: ImageRecord) -> Image.Image:
    img = Image.open(record.source_path)
    return img.convert("RGB")


def assemble_mosaic(
    spec: MosaicSpec,
    loader: Callable[[ImageRecord], Image.Image] = default_loader,
    cell_pixels: int = CELL_PIXELS,
) -> Image.Image:
    """Render the four cells into one RGB raster.

    Each source image is stretched to ``cell_pixels`` square with
    bilinear resampling (aspect ratio is not preserved) and pasted at
    the offset given by :func:`pixel_offset`. An already cell-sized
    image is pasted as-is, bit-identically.
    """
    canvas = Image.new("RGB", (2 * cell_pixels, 2 * cell_pixels))
    for (x, y), rec in sorted(spec.cells.items()):
        try:
            img = loader(rec)
        except Exception as exc:
            raise AssemblyError(
                f"failed to load {rec.image_id!r}: {exc}", image_id=rec.image_id
            ) from exc
        if img.mode != "RGB":
            img = img.convert("RGB")
        if img.size != (cell_pixels, cell_pixels):
            try:
                img = img.resize((cell_pixels, cell_pixels), Image.BILINEAR)
            except Exception as exc:
                raise AssemblyError(
                    f"failed to resize {rec.image_id!r}: {exc}", image_id=rec.image_id
                ) from exc
        canvas.paste(img, pixel_offset(x, y, cell_pixels))
    return canvas


def scan_class_folders(root: str | Path) -> list[ImageRecord]:
    """Build a sampling pool from a folder-per-class directory tree."""
    root = Path(root)
    pool: list[ImageRecord] = []
    for class_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for img_path in sorted(class_dir.iterdir()):
            if img_path.suffix.lower() in IMAGE_SUFFIXES:
                pool.append(
                    ImageRecord(
                        image_id=f"{class_dir.name}/{img_path.name}",
                        class_label=class_dir.name,
                        source_path=str(img_path),
                    )
                )
    return pool


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "-", text).strip("-") or "x"


def derive_seed(global_seed: int, *parts: str) -> int:
    """Stable 64-bit stream seed for one mosaic, independent of platform."""
    h = hashlib.sha256()
    h.update(str(np.uint64(global_seed)).encode())
    for p in parts:
        h.update(b"\x00")
        h.update(p.encode())
    return int.from_bytes(h.digest()[:8], "little")


@dataclass(frozen=True)
class DatasetBuildConfig:
    """Inputs for :func:`build_dataset`."""

    classes_dir: str
    out_dir: str
    targets: Mapping[str, int]  # target class -> mosaic count
    other_class_policy: str
    seed: int
    dataset_name: str = "mosaics"
    cell_pixels: int = CELL_PIXELS


def build_dataset(config: DatasetBuildConfig) -> MosaicManifest:
    """Sample, assemble, and write a whole mosaic dataset.

    Writes one PNG per mosaic plus ``manifest.json``; the manifest alone
    suffices to recompute every confusion tally. Re-running with the
    same config produces a byte-identical manifest. Requesting zero
    mosaics returns an empty manifest and writes nothing.
    """
    pool = scan_class_folders(config.classes_dir)
    specs: list[MosaicSpec] = []
    for target in sorted(config.targets):
        for i in range(config.targets[target]):
            seed_i = derive_seed(config.seed, config.dataset_name, target, str(i))
            mosaic_id = f"{_slug(config.dataset_name)}-{_slug(target)}-{i:04d}"
            specs.append(
                sample_mosaic_spec(
                    pool, target, config.other_class_policy, seed_i, mosaic_id=mosaic_id
                )
            )

    manifest = MosaicManifest(
        dataset_name=config.dataset_name,
        mosaics=tuple(specs),
        global_seed=int(config.seed),
        cell_pixels=config.cell_pixels,
        mosaic_pixels=2 * config.cell_pixels,
    )
    if not specs:
        return manifest

    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for spec in specs:
        raster = assemble_mosaic(spec, cell_pixels=config.cell_pixels)
        raster.save(out / f"{spec.mosaic_id}.png", format="PNG")
    manifest.save(out / "manifest.json")
    return manifest
