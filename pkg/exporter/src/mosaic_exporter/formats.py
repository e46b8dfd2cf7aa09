"""Interchange saliency format, writer side.

The layout mirrors the benchmark's reader contract: magic ``SALM``,
version u16, width u32, height u32 (all little-endian), float32
row-major payload with row 0 at the top, then a CRC-32 of header plus
payload as a trailing u32. A JSON sidecar ``<file>.meta.json`` names
the mosaic, method, target class, and sign capability.

Written independently on purpose: this package talks to the benchmark
through files only, so the bytes here are produced from the documented
layout rather than shared code.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

MAGIC = b"SALM"
VERSION = 1
_HEADER = struct.Struct("<4sHII")
_TRAILER = struct.Struct("<I")

SIGN_CAPABILITIES = ("signed", "positive_only")


def saliency_blob(values: np.ndarray) -> bytes:
    """Serialize a 2-d float array to the binary interchange layout."""
    arr = np.ascontiguousarray(values, dtype="<f4")
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"need a non-empty 2-d array, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("refusing to serialize non-finite values")
    height, width = arr.shape
    header = _HEADER.pack(MAGIC, VERSION, width, height)
    payload = arr.tobytes(order="C")
    crc = zlib.crc32(header + payload) & 0xFFFFFFFF
    return header + payload + _TRAILER.pack(crc)


def sidecar_path(path: str | Path) -> Path:
    return Path(str(path) + ".meta.json")


def write_map(
    path: str | Path,
    values: np.ndarray,
    *,
    mosaic_id: str,
    method_id: str,
    target_class: str,
    sign_capability: str,
) -> tuple[Path, Path]:
    """Write one map file plus its sidecar; returns both paths."""
    if sign_capability not in SIGN_CAPABILITIES:
        raise ValueError(f"unknown sign_capability {sign_capability!r}")
    if sign_capability == "positive_only" and np.asarray(values).min() < 0:
        raise ValueError("positive_only map carries negative values")
    path = Path(path)
    path.write_bytes(saliency_blob(values))
    doc = {
        "mosaic_id": mosaic_id,
        "method_id": method_id,
        "target_class": target_class,
        "sign_capability": sign_capability,
    }
    side = sidecar_path(path)
    side.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path, side
