"""Out-of-process attribution exporter for mosaic benchmarks.

Reads a dataset manifest plus mosaic PNGs, runs an attribution method
per mosaic, and writes interchange-format saliency files (binary map +
JSON sidecar). Coupling to the consuming benchmark is file-only.
"""

from .errors import ExporterError
from .export import ExportFailure, ExportReport, export, rasterize_nearest
from .formats import saliency_blob, sidecar_path, write_map
from .jobs import ExportJob
from .manifest import CellRef, ManifestView, MosaicEntry
from .methods import REGISTRY, ExportContext, MethodSpec, build_model, get_method

__all__ = [
    "CellRef",
    "ExportContext",
    "ExportFailure",
    "ExportJob",
    "ExportReport",
    "ExporterError",
    "ManifestView",
    "MethodSpec",
    "MosaicEntry",
    "REGISTRY",
    "build_model",
    "export",
    "get_method",
    "rasterize_nearest",
    "saliency_blob",
    "sidecar_path",
    "write_map",
]
