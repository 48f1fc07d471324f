"""Dataset iteration: recursive image-folder scanning and square crops."""
from __future__ import annotations

from collections import OrderedDict
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .exceptions import InputError

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp", ".webp",
                    ".tif", ".tiff", ".ppm", ".pgm"}


def list_images(root) -> list[Path]:
    """All raster files under root, recursively, ordered by path."""
    root = Path(root)
    if not root.is_dir():
        raise InputError(f"dataset root {root} is not a directory")
    return sorted(p for p in root.rglob("*")
                  if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS)


def image_to_tensor(img: Image.Image) -> torch.Tensor:
    """8-bit RGB -> float tensor [3, H, W] in [0, 1]."""
    arr = np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0
    return torch.from_numpy(arr).permute(2, 0, 1).contiguous()


def tensor_to_image(x: torch.Tensor) -> Image.Image:
    """Float tensor [3, H, W] in [0, 1] -> 8-bit RGB image (rounded)."""
    arr = x.detach().cpu().clamp(0.0, 1.0).numpy()
    arr = np.rint(arr * 255.0).astype(np.uint8).transpose(1, 2, 0)
    return Image.fromarray(arr, mode="RGB")


def load_image(path) -> torch.Tensor:
    try:
        with Image.open(path) as img:
            return image_to_tensor(img)
    except InputError:
        raise
    except Exception as exc:
        raise InputError(f"cannot read image {path}: {exc}") from exc


def random_square_crop(x: torch.Tensor, size: int,
                       rng: np.random.Generator) -> torch.Tensor:
    """Random size x size crop; images smaller than size are upscaled first."""
    _, h, w = x.shape
    if min(h, w) < size:
        scale = size / min(h, w)
        new_h, new_w = int(np.ceil(h * scale)), int(np.ceil(w * scale))
        x = torch.nn.functional.interpolate(
            x.unsqueeze(0), size=(new_h, new_w), mode="bilinear",
            align_corners=False).squeeze(0)
        _, h, w = x.shape
    top = int(rng.integers(0, h - size + 1))
    left = int(rng.integers(0, w - size + 1))
    return x[:, top:top + size, left:left + size]


class ImageFolderDataset:
    """Directory of images with deterministic ordering and seeded crops.

    Decoded images are cached LRU-style; safe for concurrent readers over
    disjoint samples (the cache is only an optimization).
    """

    def __init__(self, root, resolution: int, cache_size: int = 64):
        self.root = Path(root)
        self.resolution = resolution
        self.paths = list_images(root)
        if not self.paths:
            raise InputError(f"no images found under {root}")
        self._cache: OrderedDict[Path, torch.Tensor] = OrderedDict()
        self._cache_size = cache_size

    def __len__(self) -> int:
        return len(self.paths)

    def _full_image(self, idx: int) -> torch.Tensor:
        path = self.paths[idx]
        if path in self._cache:
            self._cache.move_to_end(path)
            return self._cache[path]
        img = load_image(path)
        self._cache[path] = img
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return img

    def get(self, idx: int, rng: np.random.Generator) -> torch.Tensor:
        """Random square crop of image idx at the configured resolution."""
        return random_square_crop(self._full_image(idx), self.resolution, rng)

    def sample(self, rng: np.random.Generator) -> torch.Tensor:
        return self.get(int(rng.integers(0, len(self.paths))), rng)
