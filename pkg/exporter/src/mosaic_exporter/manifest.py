"""Read-only view of a mosaic dataset manifest.

Parses the dataset's ``manifest.json`` as published by the benchmark:
cell coordinates use (x, y) with (0, 0) the bottom-left quadrant and
(1, 1) the top-right, so the pixel block for a cell starts at row
``cell_pixels * (1 - x)`` and column ``cell_pixels * y``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ExporterError


@dataclass(frozen=True)
class CellRef:
    x: int
    y: int
    image_id: str
    class_label: str


@dataclass(frozen=True)
class MosaicEntry:
    mosaic_id: str
    target_class: str
    cells: tuple[CellRef, ...]

    def target_mask(self, cell_pixels: int) -> np.ndarray:
        """Boolean (2c, 2c) grid, True on target-class quadrants."""
        side = 2 * cell_pixels
        mask = np.zeros((side, side), dtype=bool)
        for cell in self.cells:
            if cell.class_label != self.target_class:
                continue
            top = cell_pixels * (1 - cell.x)
            left = cell_pixels * cell.y
            mask[top:top + cell_pixels, left:left + cell_pixels] = True
        return mask


@dataclass(frozen=True)
class ManifestView:
    dataset_name: str
    cell_pixels: int
    mosaic_pixels: int
    entries: tuple[MosaicEntry, ...]
    root: Path

    @classmethod
    def load(cls, path: str | Path) -> "ManifestView":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ExporterError(f"cannot read manifest {path}: {exc}") from exc
        try:
            entries = []
            for m in doc["mosaics"]:
                cells = tuple(
                    CellRef(
                        x=int(c["x"]),
                        y=int(c["y"]),
                        image_id=str(c["image_id"]),
                        class_label=str(c["class_label"]),
                    )
                    for c in m["cells"]
                )
                entries.append(
                    MosaicEntry(
                        mosaic_id=str(m["mosaic_id"]),
                        target_class=str(m["target_class"]),
                        cells=cells,
                    )
                )
            view = cls(
                dataset_name=str(doc["dataset_name"]),
                cell_pixels=int(doc["cell_pixels"]),
                mosaic_pixels=int(doc["mosaic_pixels"]),
                entries=tuple(entries),
                root=path.parent,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ExporterError(f"malformed manifest {path}: {exc}") from exc
        if view.mosaic_pixels != 2 * view.cell_pixels:
            raise ExporterError(
                f"manifest {path}: mosaic_pixels {view.mosaic_pixels} "
                f"!= 2 * cell_pixels {view.cell_pixels}"
            )
        return view

    def classes(self) -> tuple[str, ...]:
        """Sorted distinct class labels appearing anywhere in the dataset."""
        seen = {c.class_label for e in self.entries for c in e.cells}
        seen.update(e.target_class for e in self.entries)
        return tuple(sorted(seen))

    def png_path(self, mosaic_id: str, images_dir: Path | None = None) -> Path:
        return (images_dir or self.root) / f"{mosaic_id}.png"
