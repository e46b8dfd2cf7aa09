"""Job files: one JSON object drives one export run."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .errors import ExporterError
from .methods import get_method


@dataclass(frozen=True)
class ExportJob:
    manifest_path: Path
    method: str
    out_dir: Path
    model: str = "none"
    params: Mapping[str, Any] = field(default_factory=dict)
    method_id: str = ""
    images_dir: Path | None = None

    def __post_init__(self):
        spec = get_method(self.method)  # raises on unknown method
        if spec.needs_model and self.model == "none":
            raise ExporterError(
                f"method {self.method!r} needs a model; job says model='none'"
            )
        if not self.method_id:
            object.__setattr__(self, "method_id", self.method)

    @classmethod
    def from_mapping(cls, doc: Mapping[str, Any], base: Path) -> "ExportJob":
        """Build from parsed JSON; relative paths resolve against *base*."""
        if not isinstance(doc, Mapping):
            raise ExporterError("job file must hold a JSON object")
        unknown = set(doc) - {
            "manifest", "method", "out_dir", "model", "params", "method_id", "images_dir"
        }
        if unknown:
            raise ExporterError(f"job file has unknown keys: {sorted(unknown)}")
        try:
            manifest = base / str(doc["manifest"])
            method = str(doc["method"])
            out_dir = base / str(doc["out_dir"])
        except KeyError as exc:
            raise ExporterError(f"job file lacks required key {exc.args[0]!r}") from None
        params = doc.get("params", {})
        if not isinstance(params, Mapping):
            raise ExporterError("job 'params' must be an object")
        images = doc.get("images_dir")
        return cls(
            manifest_path=manifest,
            method=method,
            out_dir=out_dir,
            model=str(doc.get("model", "none")),
            params=dict(params),
            method_id=str(doc.get("method_id", "")),
            images_dir=(base / str(images)) if images is not None else None,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ExportJob":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ExporterError(f"cannot read job file {path}: {exc}") from exc
        return cls.from_mapping(doc, base=path.parent)
