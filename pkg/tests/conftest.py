import sys
from pathlib import Path

import numpy as np
import pytest
import torch
from PIL import Image

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable


@pytest.fixture(autouse=True)
def _deterministic_torch():
    torch.manual_seed(0)


def make_image_dir(root: Path, count: int = 8, size: int = 160,
                   seed: int = 0, constant: float | None = None):
    """Write small RGB PNGs; smooth random blobs unless constant is set."""
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    for i in range(count):
        if constant is not None:
            arr = np.full((size, size, 3), int(round(constant * 255)),
                          dtype=np.uint8)
        else:
            # low-frequency content so a tiny model can overfit
            coarse = rng.uniform(0, 255, size=(size // 16, size // 16, 3))
            img = Image.fromarray(coarse.astype(np.uint8), "RGB")
            arr = np.asarray(img.resize((size, size), Image.BILINEAR))
        Image.fromarray(arr, "RGB").save(root / f"img_{i:02d}.png")
    return root


@pytest.fixture
def image_dir(tmp_path):
    return make_image_dir(tmp_path / "images")


def grad_check(f, tensors, eps=1e-4, rtol=1e-3, atol=1e-5, seed=0):
    """Compare autograd gradients of ``f(*tensors)`` against central
    finite differences, elementwise, in float64.

    ``f`` must return a tensor; it is reduced to a scalar with a fixed
    random projection so every output element influences the check.
    """
    from oracles import central_difference_grad

    tensors = [t.detach().double().requires_grad_(True) for t in tensors]
    out = f(*tensors)
    proj = torch.from_numpy(
        np.random.default_rng(seed).standard_normal(tuple(out.shape)))
    scalar = (out * proj).sum()
    analytic = torch.autograd.grad(scalar, tensors, allow_unused=False)

    for idx, t in enumerate(tensors):
        def scalar_of(arr, idx=idx):
            args = [a.detach().clone() for a in tensors]
            args[idx] = torch.from_numpy(arr)
            return float((f(*args) * proj).sum().detach())

        numeric = central_difference_grad(scalar_of,
                                          t.detach().numpy().copy(), eps)
        a = analytic[idx].numpy()
        denom = np.maximum(np.abs(a), np.abs(numeric))
        err = np.abs(a - numeric)
        ok = err <= atol + rtol * denom
        assert ok.all(), (
            f"gradient mismatch on tensor {idx}: max abs err "
            f"{err.max():.3e}, max rel err "
            f"{(err / np.maximum(denom, 1e-12)).max():.3e}")
