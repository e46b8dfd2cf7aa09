"""Attribution methods and stubs.

Each method receives an :class:`ExportContext` and a parameter mapping
and returns a 2-d float array. Coarse (superpixel) outputs are allowed;
the export step rasterizes them to the mosaic size. A method's sign
capability is declared here, next to its code, and enforced at write
time: a positive-only method may never emit a negative value.

The gradient adapters need torch. They run a small deterministic CNN
built in-process (seeded random weights, no downloads), standing in for
whatever trained network the host environment provides. When torch is
absent the stubs still work and jobs naming a gradient method are
refused up front.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping

import numpy as np

from .errors import ExporterError
from .manifest import ManifestView, MosaicEntry


@dataclass(frozen=True)
class ExportContext:
    entry: MosaicEntry
    view: ManifestView
    image: np.ndarray | None  # (H, W, 3) float32 in [0, 1]; None unless needs_image
    model: Any  # opaque handle from build_model; None unless needs_model


@dataclass(frozen=True)
class MethodSpec:
    name: str
    sign_capability: str
    needs_image: bool
    needs_model: bool
    fn: Callable[[ExportContext, Mapping[str, Any]], np.ndarray]
    summary: str


def _side(ctx: ExportContext) -> int:
    return ctx.view.mosaic_pixels


def _amplitude(params: Mapping[str, Any]) -> float:
    amp = float(params.get("amplitude", 1.0))
    if not amp > 0:
        raise ExporterError(f"amplitude must be positive, got {amp}")
    return amp


def zeros_method(ctx: ExportContext, params: Mapping[str, Any]) -> np.ndarray:
    n = _side(ctx)
    return np.zeros((n, n), dtype=np.float32)


def target_positive_method(ctx: ExportContext, params: Mapping[str, Any]) -> np.ndarray:
    amp = _amplitude(params)
    mask = ctx.entry.target_mask(ctx.view.cell_pixels)
    return np.where(mask, np.float32(amp), np.float32(0.0)).astype(np.float32)


def target_signed_method(ctx: ExportContext, params: Mapping[str, Any]) -> np.ndarray:
    amp = _amplitude(params)
    mask = ctx.entry.target_mask(ctx.view.cell_pixels)
    return np.where(mask, np.float32(amp), np.float32(-amp)).astype(np.float32)


def brightness_contrast_method(ctx: ExportContext, params: Mapping[str, Any]) -> np.ndarray:
    """Superpixel stub: per-block mean luminance minus the global mean."""
    grid = int(params.get("grid", 14))
    if not 1 <= grid <= _side(ctx):
        raise ExporterError(f"grid must be in [1, {_side(ctx)}], got {grid}")
    gray = ctx.image.mean(axis=2)
    n = gray.shape[0]
    rows = (np.arange(n) * grid) // n  # pixel -> superpixel index
    coarse = np.zeros((grid, grid), dtype=np.float64)
    counts = np.zeros((grid, grid), dtype=np.int64)
    np.add.at(coarse, (rows[:, None], rows[None, :]), gray)
    np.add.at(counts, (rows[:, None], rows[None, :]), 1)
    coarse = coarse / counts - gray.mean()
    return coarse.astype(np.float32)


def _torch():
    try:
        import torch  # noqa: F401
        return torch
    except ImportError as exc:
        raise ExporterError(
            "method needs torch, which is not installed in this environment"
        ) from exc


def build_model(model_id: str, num_classes: int):
    """Instantiate the network a gradient method differentiates through."""
    if model_id == "builtin:tiny-cnn":
        torch = _torch()
        gen = torch.Generator().manual_seed(2089)
        if num_classes < 1:
            raise ExporterError("model needs at least one class")

        def rand(*shape):
            return (torch.randn(*shape, generator=gen) * 0.2)

        return {
            "kind": "tiny-cnn",
            "w1": rand(8, 3, 3, 3), "b1": torch.zeros(8),
            "w2": rand(16, 8, 3, 3), "b2": torch.zeros(16),
            "wf": rand(num_classes, 16), "bf": torch.zeros(num_classes),
        }
    raise ExporterError(f"unknown model {model_id!r}; expected 'builtin:tiny-cnn'")


def _forward(model, x):
    import torch.nn.functional as F

    h = F.relu(F.conv2d(x, model["w1"], model["b1"], stride=2, padding=1))
    h = F.relu(F.conv2d(h, model["w2"], model["b2"], stride=2, padding=1))
    h = h.mean(dim=(2, 3))
    return h @ model["wf"].T + model["bf"]


def _grad_times_input(ctx: ExportContext) -> np.ndarray:
    torch = _torch()
    classes = ctx.view.classes()
    try:
        idx = classes.index(ctx.entry.target_class)
    except ValueError:
        raise ExporterError(
            f"target class {ctx.entry.target_class!r} absent from dataset classes"
        )
    x = torch.from_numpy(ctx.image.transpose(2, 0, 1)[None].copy())
    x.requires_grad_(True)
    logits = _forward(ctx.model, x)
    logits[0, idx].backward()
    sal = (x * x.grad).detach()[0].sum(dim=0)
    return sal.numpy().astype(np.float32)


def grad_input_method(ctx: ExportContext, params: Mapping[str, Any]) -> np.ndarray:
    return _grad_times_input(ctx)


def grad_magnitude_method(ctx: ExportContext, params: Mapping[str, Any]) -> np.ndarray:
    return np.abs(_grad_times_input(ctx))


REGISTRY: dict[str, MethodSpec] = {
    spec.name: spec
    for spec in (
        MethodSpec(
            "zeros", "signed", needs_image=False, needs_model=False,
            fn=zeros_method, summary="all-zero map; every tally mass is 0",
        ),
        MethodSpec(
            "target-positive", "positive_only", needs_image=False, needs_model=False,
            fn=target_positive_method,
            summary="+amplitude on target quadrants, 0 elsewhere",
        ),
        MethodSpec(
            "target-signed", "signed", needs_image=False, needs_model=False,
            fn=target_signed_method,
            summary="+amplitude on target quadrants, -amplitude elsewhere",
        ),
        MethodSpec(
            "brightness-contrast", "signed", needs_image=True, needs_model=False,
            fn=brightness_contrast_method,
            summary="superpixel luminance deviation from the image mean",
        ),
        MethodSpec(
            "grad-input", "signed", needs_image=True, needs_model=True,
            fn=grad_input_method,
            summary="gradient times input for the target logit (torch)",
        ),
        MethodSpec(
            "grad-magnitude", "positive_only", needs_image=True, needs_model=True,
            fn=grad_magnitude_method,
            summary="absolute gradient times input (torch)",
        ),
    )
}


def get_method(name: str) -> MethodSpec:
    try:
        return REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(REGISTRY))
        raise ExporterError(f"unknown method {name!r}; known: {known}") from None
