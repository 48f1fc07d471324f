"""Feature-extractor adapters for perceptual and style losses.

An extractor maps an image batch in [0, 1] to an ordered list of feature
maps (coarse to fine as extracted); any input normalization is the
adapter's own business. Adapters are read-only and safe for concurrent
evaluation.
"""
from __future__ import annotations

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .exceptions import DependencyError


class IdentityExtractor(nn.Module):
    """Single 'layer' equal to the image itself; useful for tests, where
    the perceptual loss must reduce to plain L1."""

    def forward(self, images):
        return [images]


class RandomConvExtractor(nn.Module):
    """Three strided conv stages with fixed random weights.

    A deterministic stand-in for a pretrained backbone: feature maps at
    1/2, 1/4 and 1/8 resolution, differentiable w.r.t. the input but with
    frozen weights derived from the seed.
    """

    def __init__(self, seed: int = 0, channels=(8, 16, 32)):
        super().__init__()
        rng = np.random.default_rng(seed)
        in_ch = 3
        for i, out_ch in enumerate(channels):
            w = rng.standard_normal((out_ch, in_ch, 3, 3)) / np.sqrt(in_ch * 9)
            b = rng.standard_normal(out_ch) * 0.1
            self.register_buffer(f"w{i}", torch.from_numpy(w.astype(np.float32)))
            self.register_buffer(f"b{i}", torch.from_numpy(b.astype(np.float32)))
            in_ch = out_ch
        self.n_stages = len(channels)

    def forward(self, images):
        feats = []
        h = images
        for i in range(self.n_stages):
            w = getattr(self, f"w{i}").to(h.dtype)
            b = getattr(self, f"b{i}").to(h.dtype)
            h = F.leaky_relu(F.conv2d(h, w, b, stride=2, padding=1), 0.2)
            feats.append(h)
        return feats


class Vgg16PoolExtractor(nn.Module):
    """VGG-16 pool1/pool2/pool3 feature maps (ImageNet normalization).

    Pretrained weights are not bundled: pass a local ``weights_path``
    (a torchvision VGG-16 state dict) or set ``pretrained=False`` for an
    untrained backbone (structure only).
    """

    POOL_INDICES = (4, 9, 16)

    def __init__(self, weights_path=None, pretrained: bool = True):
        super().__init__()
        try:
            from torchvision.models import vgg16
        except ImportError as exc:
            raise DependencyError(f"torchvision unavailable: {exc}") from exc
        model = vgg16(weights=None)
        if weights_path is not None:
            state = torch.load(weights_path, map_location="cpu",
                               weights_only=True)
            model.load_state_dict(state)
        elif pretrained:
            raise DependencyError(
                "pretrained VGG-16 weights are not distributed with this "
                "package; pass weights_path or pretrained=False")
        self.features = model.features[: self.POOL_INDICES[-1] + 1].eval()
        for p in self.features.parameters():
            p.requires_grad_(False)
        self.register_buffer(
            "mean", torch.tensor([0.485, 0.456, 0.406]).view(1, 3, 1, 1))
        self.register_buffer(
            "std", torch.tensor([0.229, 0.224, 0.225]).view(1, 3, 1, 1))

    def forward(self, images):
        h = (images - self.mean) / self.std
        feats = []
        for i, layer in enumerate(self.features):
            h = layer(h)
            if i in self.POOL_INDICES:
                feats.append(h)
        return feats


def make_extractor(name: str, **kwargs) -> nn.Module:
    """Factory used by configs: identity | random | vgg16."""
    if name == "identity":
        return IdentityExtractor()
    if name == "random":
        return RandomConvExtractor(seed=int(kwargs.get("seed", 0)))
    if name == "vgg16":
        return Vgg16PoolExtractor(weights_path=kwargs.get("weights_path"),
                                  pretrained=kwargs.get("pretrained", True))
    raise DependencyError(f"unknown feature extractor {name!r}")
