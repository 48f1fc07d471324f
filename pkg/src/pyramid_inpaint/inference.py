"""Full-pyramid inference from saved checkpoints.

Inference chains the content generator with each texture generator,
compositing at every level so known pixels pass through untouched.
"""
from __future__ import annotations

import dataclasses

import torch

from . import checkpoint as ckpt
from .exceptions import DependencyError, DimensionError
from .networks import build_generator
from .pyramid import build_pyramid, composite


@dataclasses.dataclass
class InpaintResult:
    """Per-level outputs: SR prediction (texture levels, two-stage only),
    refined/coarse prediction, and the composite."""

    level: int
    x_sr: torch.Tensor | None
    x_pred: torch.Tensor
    y: torch.Tensor


class PyramidGenerators:
    """The generator stack for one trained model, loaded read-only."""

    def __init__(self, generators: list, manifests: list[dict]):
        if not generators:
            raise DependencyError("checkpoint holds no levels")
        self.generators = generators
        self.manifests = manifests
        self.scale_factor = int(manifests[0].get("scale_factor", 2))
        self.base_resolution = int(manifests[0].get("level_resolution",
                                                    manifests[0].get("base_resolution", 64)))

    @property
    def level_count(self) -> int:
        return len(self.generators)

    @property
    def full_resolution(self) -> int:
        return self.base_resolution * self.scale_factor ** (self.level_count - 1)

    @classmethod
    def load(cls, root) -> "PyramidGenerators":
        levels = ckpt.completed_levels(root)
        if not levels:
            raise DependencyError(f"no level checkpoints under {root}")
        generators, manifests = [], []
        for level in levels:
            manifest = ckpt.read_manifest(root, level)
            widths = manifest.get("widths", {})
            width = int(widths.get("content" if level == 0 else "texture", 64))
            two_stage = bool(manifest.get("loss_toggles", {})
                             .get("two_stage", True))
            gen = build_generator(level, width=width, two_stage=two_stage)
            ckpt.load_module_state(gen, ckpt.load_blob(root, level),
                                   "generator")
            gen.eval()
            for p in gen.parameters():
                p.requires_grad_(False)
            generators.append(gen)
            manifests.append(manifest)
        return cls(generators, manifests)


def infer_pyramid(x_masked: torch.Tensor, m: torch.Tensor,
                  generators: PyramidGenerators,
                  return_intermediates: bool = False):
    """Run the full coarse-to-fine chain on one masked image.

    ``x_masked`` is [3, H, W] with H, W divisible by r^(L-1); ``m`` is the
    matching [1, H, W] mask. Returns ``(y, intermediates)`` where ``y`` is
    the full-resolution composite (known pixels equal the input exactly)
    and ``intermediates`` lists per-level results when requested.
    """
    if x_masked.dim() != 3 or m.dim() != 3:
        raise DimensionError("expected unbatched [C, H, W] image and mask")
    levels = generators.level_count
    sample = build_pyramid(x_masked, m, levels, generators.scale_factor)
    intermediates: list[InpaintResult] = []
    y = None
    with torch.no_grad():
        for i, lv in enumerate(sample.levels):
            z_i = lv.z.unsqueeze(0)
            m_i = lv.m.unsqueeze(0)
            if i == 0:
                pred = generators.generators[0](z_i, m_i)
                x_sr = None
            else:
                x_sr, pred = generators.generators[i](z_i, m_i,
                                                      y.unsqueeze(0))
                x_sr = None if x_sr is None else x_sr[0]
            y = composite(lv.z, lv.m, pred[0])
            if return_intermediates:
                intermediates.append(
                    InpaintResult(level=i, x_sr=x_sr, x_pred=pred[0], y=y))
    return y, intermediates


def make_inpaint_fn(generators: PyramidGenerators):
    """Adapter matching the evaluation harness contract: (z, m) -> y."""
    def fn(z, m):
        y, _ = infer_pyramid(z, m, generators)
        return y
    return fn
