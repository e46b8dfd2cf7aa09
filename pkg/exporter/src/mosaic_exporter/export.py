"""Run one job: per-mosaic attribution with skip-and-report fault handling."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ExporterError
from .formats import write_map
from .jobs import ExportJob
from .manifest import ManifestView, MosaicEntry
from .methods import ExportContext, MethodSpec, build_model, get_method


@dataclass(frozen=True)
class ExportFailure:
    mosaic_id: str
    reason: str  # missing-image | image-error | method-error
    message: str


@dataclass(frozen=True)
class ExportReport:
    written: tuple[Path, ...]
    failures: tuple[ExportFailure, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def rasterize_nearest(coarse: np.ndarray, side: int) -> np.ndarray:
    """Blow a coarse (h, w) grid up to (side, side), nearest superpixel."""
    h, w = coarse.shape
    rows = (np.arange(side) * h) // side
    cols = (np.arange(side) * w) // side
    return coarse[rows[:, None], cols[None, :]]


def _load_image(path: Path, side: int) -> np.ndarray:
    if not path.exists():
        raise FileNotFoundError(path)
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0
    if arr.shape != (side, side, 3):
        raise ValueError(f"{path.name}: expected {side}x{side} RGB, got {arr.shape}")
    return arr


def _run_method(
    job: ExportJob, view: ManifestView, entry: MosaicEntry,
    spec: MethodSpec, model, image,
) -> Path:
    ctx = ExportContext(entry=entry, view=view, image=image, model=model)
    values = np.asarray(spec.fn(ctx, job.params))
    if values.ndim != 2:
        raise ExporterError(f"method returned {values.ndim}-d output")
    side = view.mosaic_pixels
    if values.shape != (side, side):
        if values.shape[0] > side or values.shape[1] > side:
            raise ExporterError(
                f"method output {values.shape} exceeds mosaic size {side}"
            )
        values = rasterize_nearest(values, side)
    if not np.isfinite(values).all():
        raise ExporterError("method produced non-finite values")
    if spec.sign_capability == "positive_only" and values.min() < 0:
        raise ExporterError("positive-only method emitted negative values")
    out = job.out_dir / f"{entry.mosaic_id}__{job.method_id}.salm"
    write_map(
        out, values,
        mosaic_id=entry.mosaic_id,
        method_id=job.method_id,
        target_class=entry.target_class,
        sign_capability=spec.sign_capability,
    )
    return out


def export(job: ExportJob) -> ExportReport:
    """Write one map + sidecar per manifest mosaic; collect per-mosaic faults."""
    view = ManifestView.load(job.manifest_path)
    spec = get_method(job.method)
    model = build_model(job.model, len(view.classes())) if spec.needs_model else None
    job.out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    failures: list[ExportFailure] = []
    for entry in view.entries:
        image = None
        if spec.needs_image:
            try:
                image = _load_image(
                    view.png_path(entry.mosaic_id, job.images_dir), view.mosaic_pixels
                )
            except FileNotFoundError as exc:
                failures.append(
                    ExportFailure(entry.mosaic_id, "missing-image", f"no PNG at {exc}")
                )
                continue
            except (OSError, ValueError) as exc:
                failures.append(ExportFailure(entry.mosaic_id, "image-error", str(exc)))
                continue
        try:
            written.append(_run_method(job, view, entry, spec, model, image))
        except (ExporterError, ArithmeticError, RuntimeError, ValueError, OSError) as exc:
            failures.append(ExportFailure(entry.mosaic_id, "method-error", str(exc)))
    return ExportReport(written=tuple(written), failures=tuple(failures))
