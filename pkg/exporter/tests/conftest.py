"""Fixtures: a small rendered mosaic dataset, built through the
benchmark's own command line so the only coupling is files."""

from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest
from PIL import Image

CLASSES = ("cat", "dog", "fox", "owl")
CELL = 16
COUNT = 6


@pytest.fixture(scope="session")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("dataset")
    classes = root / "classes"
    rng = np.random.default_rng(90)
    for c in CLASSES:
        d = classes / c
        d.mkdir(parents=True)
        for i in range(4):
            pixels = rng.integers(0, 256, size=(CELL, CELL, 3), dtype=np.uint8)
            Image.fromarray(pixels, "RGB").save(d / f"{i:02d}.png")
    out = root / "data"
    subprocess.run(
        [
            sys.executable, "-m", "salbench.cli", "build-mosaics",
            "--classes", str(classes), "--out", str(out),
            "--target", "cat", "--count", str(COUNT),
            "--seed", "21", "--cell-pixels", str(CELL),
        ],
        check=True, capture_output=True,
    )
    return out


@pytest.fixture
def make_job(dataset, tmp_path):
    """Write a job JSON next to tmp outputs; returns its path."""

    def _make(method, *, model="none", params=None, method_id=None, out_name="maps"):
        doc = {
            "manifest": str(dataset / "manifest.json"),
            "method": method,
            "out_dir": str(tmp_path / out_name),
        }
        if model != "none":
            doc["model"] = model
        if params:
            doc["params"] = params
        if method_id:
            doc["method_id"] = method_id
        path = tmp_path / f"job-{method}-{out_name}.json"
        path.write_text(json.dumps(doc, indent=2) + "\n")
        return path

    return _make
