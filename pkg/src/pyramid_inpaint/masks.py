"""Mask generation and ingestion.

Masks are float tensors shaped ``[1, H, W]`` holding exactly 0.0 (known)
or 1.0 (hole). Generators are pure functions of their arguments, so the
same spec always reproduces the same mask bit for bit.
"""
from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .exceptions import DimensionError, InputError

#: default ranges for free-form brush strokes
FREEFORM_DEFAULTS = {
    "min_strokes": 1,
    "max_strokes": 8,
    "min_vertices": 4,
    "max_vertices": 12,
    "min_width": 12.0,
    "max_width": None,        # None -> max(min_width, H / 8)
    "min_segment": None,      # None -> H / 16
    "max_segment": None,      # None -> H / 5
    "angle_jitter": np.pi / 2,
}


@dataclasses.dataclass(frozen=True)
class MaskSpec:
    """How to obtain a mask: generated (center/freeform) or from a file."""

    kind: str                      # "center" | "freeform" | "file"
    seed: int = 0
    params: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("center", "freeform", "file"):
            raise InputError(f"unknown mask kind {self.kind!r}")

    @classmethod
    def center(cls) -> "MaskSpec":
        return cls(kind="center")

    @classmethod
    def freeform(cls, seed: int = 0, **params) -> "MaskSpec":
        unknown = set(params) - set(FREEFORM_DEFAULTS)
        if unknown:
            raise InputError(f"unknown freeform params {sorted(unknown)}")
        return cls(kind="freeform", seed=seed, params=params)

    @classmethod
    def from_file(cls, path) -> "MaskSpec":
        return cls(kind="file", params={"path": str(path)})


def gen_center_mask(height: int, width: int) -> torch.Tensor:
    """Rectangular hole of half the image size, centered. Ratio is 0.25."""
    if height % 2 or width % 2:
        raise DimensionError(
            f"center mask needs even dimensions, got {height}x{width}")
    hole_h, hole_w = height // 2, width // 2
    top, left = (height - hole_h) // 2, (width - hole_w) // 2
    mask = torch.zeros(1, height, width)
    mask[:, top:top + hole_h, left:left + hole_w] = 1.0
    return mask


def _stamp_capsule(mask: np.ndarray, p0, p1, radius: float):
    """Mark pixels within `radius` of segment p0->p1 (thick line, disc caps)."""
    h, w = mask.shape
    y0, x0 = p0
    y1, x1 = p1
    lo_y = max(int(np.floor(min(y0, y1) - radius)), 0)
    hi_y = min(int(np.ceil(max(y0, y1) + radius)) + 1, h)
    lo_x = max(int(np.floor(min(x0, x1) - radius)), 0)
    hi_x = min(int(np.ceil(max(x0, x1) + radius)) + 1, w)
    if lo_y >= hi_y or lo_x >= hi_x:
        return
    ys, xs = np.mgrid[lo_y:hi_y, lo_x:hi_x]
    dy, dx = y1 - y0, x1 - x0
    seg_len2 = dy * dy + dx * dx
    if seg_len2 == 0.0:
        dist2 = (ys - y0) ** 2 + (xs - x0) ** 2
    else:
        t = ((ys - y0) * dy + (xs - x0) * dx) / seg_len2
        t = np.clip(t, 0.0, 1.0)
        dist2 = (ys - (y0 + t * dy)) ** 2 + (xs - (x0 + t * dx)) ** 2
    mask[lo_y:hi_y, lo_x:hi_x][dist2 <= radius * radius] = 1.0


def gen_freeform_mask(height: int, width: int, spec: MaskSpec) -> torch.Tensor:
    """Union of random thick brush strokes, deterministic under spec.seed.

    Each stroke is a polyline whose segment angles random-walk and whose
    width is drawn once per stroke; segments render as capsules (thick
    lines with disc caps).
    """
    if spec.kind != "freeform":
        raise InputError(f"expected a freeform spec, got kind={spec.kind!r}")
    p = {**FREEFORM_DEFAULTS, **spec.params}
    max_width = p["max_width"]
    if max_width is None:
        max_width = max(p["min_width"], height / 8.0)
    min_seg = p["min_segment"] if p["min_segment"] is not None else height / 16.0
    max_seg = p["max_segment"] if p["max_segment"] is not None else height / 5.0

    rng = np.random.default_rng(spec.seed)
    mask = np.zeros((height, width), dtype=np.float64)
    n_strokes = int(rng.integers(p["min_strokes"], p["max_strokes"] + 1))
    for _ in range(n_strokes):
        n_vertices = int(rng.integers(p["min_vertices"], p["max_vertices"] + 1))
        radius = rng.uniform(p["min_width"], max_width) / 2.0
        y = rng.uniform(0, height)
        x = rng.uniform(0, width)
        angle = rng.uniform(0, 2 * np.pi)
        for _ in range(n_vertices - 1):
            angle += rng.uniform(-p["angle_jitter"], p["angle_jitter"])
            length = rng.uniform(min_seg, max_seg)
            ny = np.clip(y + length * np.sin(angle), 0, height - 1)
            nx = np.clip(x + length * np.cos(angle), 0, width - 1)
            _stamp_capsule(mask, (y, x), (ny, nx), radius)
            y, x = ny, nx
    return torch.from_numpy(mask.astype(np.float32)).unsqueeze(0)


def gen_mask(height: int, width: int, spec: MaskSpec) -> torch.Tensor:
    if spec.kind == "center":
        return gen_center_mask(height, width)
    if spec.kind == "freeform":
        return gen_freeform_mask(height, width, spec)
    return load_mask_file(spec.params["path"], expected_size=(height, width),
                          allow_resize=True)


def load_mask_file(path, expected_size=None, allow_resize=False) -> torch.Tensor:
    """Read an 8-bit grayscale raster; pixels >= 128 become hole (1.0).

    With ``expected_size=(H, W)`` a differently-sized file is an error
    unless ``allow_resize`` is set, in which case it is resized with
    nearest-neighbor interpolation.
    """
    try:
        img = Image.open(path).convert("L")
    except Exception as exc:
        raise InputError(f"cannot read mask file {path}: {exc}") from exc
    if expected_size is not None and img.size != (expected_size[1], expected_size[0]):
        if not allow_resize:
            raise InputError(
                f"mask file {path} is {img.size[1]}x{img.size[0]}, "
                f"expected {expected_size[0]}x{expected_size[1]}")
        img = img.resize((expected_size[1], expected_size[0]), Image.NEAREST)
    arr = np.asarray(img, dtype=np.uint8)
    return torch.from_numpy((arr >= 128).astype(np.float32)).unsqueeze(0)


def mask_to_image(mask: torch.Tensor) -> Image.Image:
    """Encode a mask as an 8-bit grayscale PIL image (255 = hole)."""
    arr = (mask.detach().cpu().numpy()[0] > 0.5).astype(np.uint8) * 255
    return Image.fromarray(arr, mode="L")


def hole_ratio(mask: torch.Tensor) -> float:
    """Fraction of pixels marked as hole."""
    return float(mask.mean())


#: half-open ratio intervals and their table labels
RATIO_BUCKETS = [
    (0.0, 0.1, "0-10%"),
    (0.1, 0.2, "10-20%"),
    (0.2, 0.3, "20-30%"),
    (0.3, 0.4, "30-40%"),
    (0.4, 0.5, "40-50%"),
]

#: label for ratios >= 0.5, reported outside the standard buckets
OUT_OF_RANGE_BUCKET = "50-100%"


def ratio_bucket(ratio: float) -> str:
    """Bucket label for a hole ratio; >= 0.5 falls outside the table range."""
    for lo, hi, label in RATIO_BUCKETS:
        if lo <= ratio < hi:
            return label
    return OUT_OF_RANGE_BUCKET
