"""Attribution-map interchange: binary format, CSV fallback, max-scaling.

The binary layout is magic ``SALM``, version u16, width u32, height u32
(all little-endian), a row-major little-endian float32 payload with row
0 at the top, and a trailing CRC-32 of header plus payload. Every map
file travels with a ``<file>.meta.json`` sidecar naming the mosaic, the
method, the target class, and the method's sign capability. A CSV
fallback (height rows of width comma-separated values) is accepted so
fixtures can be written by hand; it uses the same sidecar.
"""

from __future__ import annotations

import dataclasses
import json
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SaliencyFormatError

MAGIC = b"SALM"
VERSION = 1
_HEADER = struct.Struct("<4sHII")
_TRAILER = struct.Struct("<I")

SIGN_CAPABILITIES = ("signed", "positive_only")


@dataclass(frozen=True)
class MethodDescriptor:
    """An attribution method as seen by the evaluation run."""

    method_id: str
    sign_capability: str = "signed"
    display_name: str = ""

    def __post_init__(self):
        if not self.method_id:
            raise ValueError("method_id must be non-empty")
        if self.sign_capability not in SIGN_CAPABILITIES:
            raise ValueError(f"unknown sign_capability {self.sign_capability!r}")


@dataclass(frozen=True, eq=False)
class SaliencyMap:
    """One per-pixel attribution grid plus its identifying metadata.

    ``values`` is a finite 2-d float array, row 0 at the top. A map from
    a positive-only method must not contain negative values.
    """

    mosaic_id: str
    method_id: str
    target_class: str
    values: np.ndarray
    sign_capability: str = "signed"

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.size == 0:
            raise ValueError(f"values must be a non-empty 2-d grid, got shape {v.shape}")
        if v.dtype not in (np.float32, np.float64):
            v = v.astype(np.float64)
        if not np.isfinite(v).all():
            raise ValueError("values contain non-finite entries")
        if self.sign_capability not in SIGN_CAPABILITIES:
            raise ValueError(f"unknown sign_capability {self.sign_capability!r}")
        if self.sign_capability == "positive_only" and float(v.min()) < 0:
            raise ValueError("positive_only map contains negative values")
        object.__setattr__(self, "values", v)

    @property
    def positive_only(self) -> bool:
        return self.sign_capability == "positive_only"


def sidecar_path(path: str | Path) -> Path:
    return Path(str(path) + ".meta.json")


def _write_sidecar(map_: SaliencyMap, path: Path) -> None:
    doc = {
        "mosaic_id": map_.mosaic_id,
        "method_id": map_.method_id,
        "target_class": map_.target_class,
        "sign_capability": map_.sign_capability,
    }
    sidecar_path(path).write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _read_sidecar(path: Path) -> dict[str, str]:
    sp = sidecar_path(path)
    if not sp.exists():
        raise SaliencyFormatError(f"no sidecar {sp.name} next to {path.name}", "missing-metadata")
    try:
        doc = json.loads(sp.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SaliencyFormatError(
            f"unreadable sidecar {sp}: {exc}", "malformed-metadata"
        ) from exc
    if not isinstance(doc, dict):
        raise SaliencyFormatError(f"sidecar {sp} is not a JSON object", "malformed-metadata")
    out: dict[str, str] = {}
    for key in ("mosaic_id", "method_id", "target_class", "sign_capability"):
        val = doc.get(key)
        if not isinstance(val, str) or not val:
            raise SaliencyFormatError(
                f"sidecar {sp} lacks string field {key!r}", "malformed-metadata"
            )
        out[key] = val
    if out["sign_capability"] not in SIGN_CAPABILITIES:
        raise SaliencyFormatError(
            f"sidecar {sp} has unknown sign_capability {out['sign_capability']!r}",
            "malformed-metadata",
        )
    return out


def binary_blob(values: np.ndarray) -> bytes:
    """Serialize a value grid to the checksummed binary layout."""
    h, w = values.shape
    body = _HEADER.pack(MAGIC, VERSION, w, h)
    body += np.ascontiguousarray(values, dtype="<f4").tobytes()
    return body + _TRAILER.pack(zlib.crc32(body) & 0xFFFFFFFF)


def _parse_blob(blob: bytes, origin: str) -> np.ndarray:
    if len(blob) < _HEADER.size + _TRAILER.size:
        raise SaliencyFormatError(f"{origin}: truncated before header ends", "malformed-header")
    magic, version, w, h = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise SaliencyFormatError(f"{origin}: bad magic {magic!r}", "malformed-header")
    if version != VERSION:
        raise SaliencyFormatError(f"{origin}: unsupported version {version}", "malformed-header")
    if w == 0 or h == 0:
        raise SaliencyFormatError(f"{origin}: degenerate size {w}x{h}", "dimension-mismatch")
    expected = _HEADER.size + 4 * w * h + _TRAILER.size
    if len(blob) != expected:
        raise SaliencyFormatError(
            f"{origin}: {len(blob)} bytes but {w}x{h} grid implies {expected}",
            "dimension-mismatch",
        )
    (stored,) = _TRAILER.unpack_from(blob, expected - _TRAILER.size)
    actual = zlib.crc32(blob[: expected - _TRAILER.size]) & 0xFFFFFFFF
    if stored != actual:
        raise SaliencyFormatError(
            f"{origin}: checksum {stored:#010x} != computed {actual:#010x}",
            "checksum-mismatch",
        )
    values = np.frombuffer(
        blob, dtype="<f4", count=w * h, offset=_HEADER.size
    ).reshape(h, w)
    if not np.isfinite(values).all():
        raise SaliencyFormatError(f"{origin}: non-finite values in grid", "non-finite-value")
    return values.astype(np.float32)


def _parse_csv(text: str, origin: str) -> np.ndarray:
    rows: list[list[float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError as exc:
            raise SaliencyFormatError(
                f"{origin}: non-numeric entry on line {lineno}", "malformed-header"
            ) from exc
    if not rows:
        raise SaliencyFormatError(f"{origin}: no data rows", "malformed-header")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise SaliencyFormatError(f"{origin}: ragged rows", "dimension-mismatch")
    values = np.asarray(rows, dtype=np.float64)
    if not np.isfinite(values).all():
        raise SaliencyFormatError(f"{origin}: non-finite values in grid", "non-finite-value")
    return values.astype(np.float32)


def write_saliency(map_: SaliencyMap, path: str | Path) -> Path:
    """Write one map plus sidecar; format chosen by suffix (.salm or .csv).

    Values are stored as little-endian float32 either way, so a float32
    grid round-trips bit-identically.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    grid = map_.values.astype(np.float32)
    if suffix == ".csv":
        lines = [",".join(repr(float(v)) for v in row) for row in grid]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    elif suffix == ".salm":
        path.write_bytes(binary_blob(grid))
    else:
        raise ValueError(f"unsupported map suffix {path.suffix!r}; use .salm or .csv")
    _write_sidecar(map_, path)
    return path


def read_saliency(path: str | Path) -> SaliencyMap:
    """Read one map and its sidecar, verifying structure and checksum."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".salm":
        values = _parse_blob(path.read_bytes(), path.name)
    elif suffix == ".csv":
        values = _parse_csv(path.read_text(encoding="utf-8"), path.name)
    else:
        raise ValueError(f"unsupported map suffix {path.suffix!r}; use .salm or .csv")
    meta = _read_sidecar(path)
    try:
        return SaliencyMap(values=values, **meta)
    except ValueError as exc:
        raise SaliencyFormatError(f"{path.name}: {exc}", "malformed-metadata") from exc


def normalize_max_scale(map_or_values):
    """Divide by the peak absolute value, mapping the grid into [-1, 1].

    An all-zero grid comes back unchanged. Signs and exact zeros are
    preserved, the peak-magnitude pixel lands on exactly +/-1, and the
    result is float64 so downstream ratios are unaffected by the
    rescale. Accepts a bare array or a SaliencyMap and returns the same
    kind.
    """
    if isinstance(map_or_values, SaliencyMap):
        return dataclasses.replace(
            map_or_values, values=normalize_max_scale(map_or_values.values)
        )
    values = np.asarray(map_or_values).astype(np.float64)
    peak = np.max(np.abs(values)) if values.size else 0.0
    if peak == 0.0:
        return values
    return values / peak
