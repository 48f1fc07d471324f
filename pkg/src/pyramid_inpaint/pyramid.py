"""Image/mask pyramids, hole masking, and compositing.

Images are float tensors ``[3, H, W]`` (or batched ``[N, 3, H, W]``) with
values in [0, 1]; masks are ``[1, H, W]`` binary tensors where 1 marks the
hole. Holes are filled with the constant 1.0 (white), so the masked input
is ``z = x * (1 - m) + m``.
"""
from __future__ import annotations

import dataclasses

import torch

from .exceptions import DimensionError


def _check_spatial(a: torch.Tensor, b: torch.Tensor, what: str):
    if a.shape[-2:] != b.shape[-2:]:
        raise DimensionError(
            f"{what}: spatial sizes differ, {tuple(a.shape[-2:])} vs "
            f"{tuple(b.shape[-2:])}")


def apply_mask(x: torch.Tensor, m: torch.Tensor) -> torch.Tensor:
    """Blank out the hole: ``z = x * (1 - m) + m`` (hole pixels become 1)."""
    _check_spatial(x, m, "apply_mask")
    return x * (1.0 - m) + m


def composite(z: torch.Tensor, m: torch.Tensor, pred: torch.Tensor) -> torch.Tensor:
    """Paste predictions into the hole: ``y = z * (1 - m) + pred * m``.

    Pixels outside the hole equal ``z`` bit-exactly.
    """
    _check_spatial(z, m, "composite")
    _check_spatial(z, pred, "composite")
    return z * (1.0 - m) + pred * m


def box_downsample(x: torch.Tensor, factor: int) -> torch.Tensor:
    """Average over non-overlapping ``factor x factor`` cells."""
    if factor == 1:
        return x
    *lead, h, w = x.shape
    if h % factor or w % factor:
        raise DimensionError(
            f"size {h}x{w} not divisible by downsample factor {factor}")
    x = x.reshape(*lead, h // factor, factor, w // factor, factor)
    return x.mean(dim=(-3, -1))


def conservative_mask_downsample(m: torch.Tensor, factor: int) -> torch.Tensor:
    """Any cell touching the hole becomes hole (max over the box)."""
    if factor == 1:
        return m
    *lead, h, w = m.shape
    if h % factor or w % factor:
        raise DimensionError(
            f"size {h}x{w} not divisible by downsample factor {factor}")
    m = m.reshape(*lead, h // factor, factor, w // factor, factor)
    return m.amax(dim=(-3, -1))


@dataclasses.dataclass
class PyramidLevel:
    """Aligned (original, masked input, mask) triplet at one scale."""

    x: torch.Tensor   # [3, H_i, W_i] original
    z: torch.Tensor   # [3, H_i, W_i] masked input
    m: torch.Tensor   # [1, H_i, W_i] binary mask


@dataclasses.dataclass
class PyramidSample:
    """Per-level triplets derived from one image+mask pair, coarse to fine."""

    levels: list[PyramidLevel]
    scale_factor: int

    @property
    def level_count(self) -> int:
        return len(self.levels)

    def sizes(self) -> list[tuple[int, int]]:
        return [tuple(lv.x.shape[-2:]) for lv in self.levels]


def build_pyramid(x: torch.Tensor, m: torch.Tensor, level_count: int,
                  scale_factor: int = 2) -> PyramidSample:
    """Downsample image and mask into a pyramid and re-mask every level.

    Level ``level_count - 1`` is full resolution; level i is reduced by
    ``scale_factor ** (level_count - 1 - i)`` using box averaging for the
    image and conservative max-pooling for the mask. Each level's masked
    input is recomputed from that level's image and mask, so
    ``z_i == apply_mask(x_i, m_i)`` holds exactly.
    """
    if level_count < 1:
        raise DimensionError("level_count must be >= 1")
    _check_spatial(x, m, "build_pyramid")
    h, w = x.shape[-2:]
    top_factor = scale_factor ** (level_count - 1)
    if h % top_factor or w % top_factor:
        raise DimensionError(
            f"{h}x{w} input not divisible by r^(L-1) = {top_factor}")
    levels = []
    for i in range(level_count):
        f = scale_factor ** (level_count - 1 - i)
        xi = box_downsample(x, f)
        mi = conservative_mask_downsample(m, f)
        levels.append(PyramidLevel(x=xi, z=apply_mask(xi, mi), m=mi))
    return PyramidSample(levels=levels, scale_factor=scale_factor)
