"""Synthetic attribution maps with known ground truth.

These generators stand in for real explanation methods so the scoring
pipeline can be exercised end to end: a perfect oracle saturates every
metric at 1, an inverted oracle zeroes the sign-sensitive ones, noise
modes realize the chance baseline, and the fidelity family corrupts the
perfect map pixelwise with probability 1 - p, which makes the expected
method ranking equal the fidelity ranking.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .confusion import target_mask
from .mosaics import CELL_PIXELS, MosaicSpec
from .saliency_io import MethodDescriptor, SaliencyMap, write_saliency

MODES = (
    "perfect",
    "inverted",
    "uniform_signed_noise",
    "positive_only_noise",
    "fidelity",
)


@dataclass(frozen=True)
class OracleConfig:
    """How to fabricate one map: mode, stream seed, peak amplitude."""

    mode: str
    seed: int
    amplitude: float = 1.0
    fidelity_p: float | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown oracle mode {self.mode!r}")
        if not self.amplitude > 0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        if self.mode == "fidelity":
            p = self.fidelity_p
            if p is None or not 0.0 <= p <= 1.0:
                raise ValueError(f"fidelity mode needs p in [0, 1], got {p}")
        elif self.fidelity_p is not None:
            raise ValueError("fidelity_p is only meaningful for fidelity mode")

    def default_method_id(self) -> str:
        if self.mode == "fidelity":
            return f"oracle-fidelity-{self.fidelity_p:.2f}"
        return f"oracle-{self.mode}"


def _stream(seed: int, mosaic_id: str, method_id: str) -> np.random.Generator:
    """Independent PRNG stream for one (run seed, mosaic, method) triple."""
    tag = f"{np.uint64(seed)}:{mosaic_id}:{method_id}".encode()
    words = np.frombuffer(hashlib.sha256(tag).digest()[:16], dtype="<u4")
    return np.random.default_rng(np.random.SeedSequence([int(w) for w in words]))


def gen_oracle_map(
    spec: MosaicSpec,
    cfg: OracleConfig,
    method_id: str | None = None,
    cell_pixels: int = CELL_PIXELS,
) -> SaliencyMap:
    """Fabricate one float32 map for ``spec``, bit-reproducible from cfg.

    fidelity(1.0) equals perfect mode and fidelity(0.0) equals inverted
    mode exactly, for any seed.
    """
    if method_id is None:
        method_id = cfg.default_method_id()
    shape = (2 * cell_pixels, 2 * cell_pixels)
    amp = np.float32(cfg.amplitude)
    mask = target_mask(spec, cell_pixels)
    ideal = np.where(mask, amp, -amp).astype(np.float32)
    capability = "signed"

    if cfg.mode == "perfect":
        values = ideal
    elif cfg.mode == "inverted":
        values = -ideal
    elif cfg.mode == "uniform_signed_noise":
        rng = _stream(cfg.seed, spec.mosaic_id, method_id)
        values = rng.uniform(-cfg.amplitude, cfg.amplitude, shape).astype(np.float32)
    elif cfg.mode == "positive_only_noise":
        rng = _stream(cfg.seed, spec.mosaic_id, method_id)
        values = rng.uniform(0.0, cfg.amplitude, shape).astype(np.float32)
        capability = "positive_only"
    else:
        rng = _stream(cfg.seed, spec.mosaic_id, method_id)
        correct = rng.random(shape) < cfg.fidelity_p
        values = np.where(correct, ideal, -ideal)

    return SaliencyMap(
        mosaic_id=spec.mosaic_id,
        method_id=method_id,
        target_class=spec.target_class,
        values=values,
        sign_capability=capability,
    )


def family_descriptors(fidelities: list[float]) -> list[MethodDescriptor]:
    """One simulated method per fidelity, ids unique even for repeats."""
    return [
        MethodDescriptor(
            method_id=f"synth{i:02d}-p{p:.2f}",
            sign_capability="signed",
            display_name=f"simulated method, fidelity {p:.2f}",
        )
        for i, p in enumerate(fidelities)
    ]


def gen_method_family(
    specs: list[MosaicSpec],
    fidelities: list[float],
    seed: int,
    out_dir: str | Path,
    amplitude: float = 1.0,
    cell_pixels: int = CELL_PIXELS,
) -> list[Path]:
    """Write one fidelity-mode map per (mosaic, simulated method).

    File names are ``<mosaic_id>__<method_id>.salm``; rerunning with the
    same arguments rewrites byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []
    descriptors = family_descriptors(fidelities)
    for spec in specs:
        for desc, p in zip(descriptors, fidelities):
            cfg = OracleConfig(mode="fidelity", seed=seed, amplitude=amplitude, fidelity_p=p)
            smap = gen_oracle_map(spec, cfg, method_id=desc.method_id, cell_pixels=cell_pixels)
            paths.append(
                write_saliency(smap, out / f"{spec.mosaic_id}__{desc.method_id}.salm")
            )
    return paths
