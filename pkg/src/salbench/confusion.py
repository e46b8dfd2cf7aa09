"""Signed-mass confusion tallies over mosaic quadrants.

Positive attribution on target-class quadrants counts toward tp and on
non-target quadrants toward fp; negative attribution contributes its
magnitude to fn on target quadrants and tn on non-target quadrants.
Exact zeros count nowhere. All four slots therefore hold non-negative
attribution mass, not pixel counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError
from .mosaics import CELL_PIXELS, MosaicSpec


def cell_of_pixel(row: int, col: int, cell_pixels: int = CELL_PIXELS) -> tuple[int, int]:
    """Cell (x, y) containing raster pixel (row, col), row 0 at the top."""
    if not (0 <= row < 2 * cell_pixels and 0 <= col < 2 * cell_pixels):
        raise ValueError(f"pixel ({row}, {col}) outside {2 * cell_pixels}px raster")
    return 1 - row // cell_pixels, col // cell_pixels


def quadrant_class(
    spec: MosaicSpec, row: int, col: int, cell_pixels: int = CELL_PIXELS
) -> str:
    """Class label of the mosaic cell under raster pixel (row, col)."""
    return spec.cells[cell_of_pixel(row, col, cell_pixels)].class_label


def target_mask(spec: MosaicSpec, cell_pixels: int = CELL_PIXELS) -> np.ndarray:
    """Boolean (2c, 2c) raster, True on pixels of target-class cells."""
    mask = np.zeros((2 * cell_pixels, 2 * cell_pixels), dtype=bool)
    for x, y in spec.target_coords():
        left, top = cell_pixels * y, cell_pixels * (1 - x)
        mask[top : top + cell_pixels, left : left + cell_pixels] = True
    return mask


@dataclass(frozen=True)
class ConfusionTally:
    """Signed-mass confusion entries for one (mosaic, method) pair."""

    tp: float
    fp: float
    fn: float
    tn: float

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {v}")

    @property
    def total(self) -> float:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "ConfusionTally") -> "ConfusionTally":
        return ConfusionTally(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )

    def as_dict(self) -> dict[str, float]:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


def tally_confusion(
    values: np.ndarray,
    target: MosaicSpec | np.ndarray,
) -> ConfusionTally:
    """Tally one attribution raster against the target-quadrant layout.

    ``target`` is either a boolean mask of the same shape or a
    :class:`MosaicSpec`, in which case the cell size is inferred from
    the raster shape (which must then be square with even side).
    Accumulation runs in float64 regardless of input dtype.
    """
    values = np.asarray(values)
    if values.ndim != 2:
        raise DimensionMismatchError(f"expected 2-d raster, got shape {values.shape}")
    if not np.isfinite(values).all():
        raise ValueError("attribution raster contains non-finite values")

    if isinstance(target, MosaicSpec):
        h, w = values.shape
        if h != w or h % 2:
            raise DimensionMismatchError(
                f"square raster with even side required to infer cells, got {values.shape}"
            )
        mask = target_mask(target, cell_pixels=h // 2)
    else:
        mask = np.asarray(target)
        if mask.dtype != bool:
            raise TypeError(f"target mask must be boolean, got dtype {mask.dtype}")
        if mask.shape != values.shape:
            raise DimensionMismatchError(
                f"mask shape {mask.shape} does not match raster shape {values.shape}"
            )

    v = values.astype(np.float64, copy=False)
    pos = np.where(v > 0, v, 0.0)
    neg = np.where(v < 0, -v, 0.0)
    return ConfusionTally(
        tp=float(np.sum(pos[mask])),
        fp=float(np.sum(pos[~mask])),
        fn=float(np.sum(neg[mask])),
        tn=float(np.sum(neg[~mask])),
    )
