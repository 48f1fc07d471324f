"""Image quality metrics: L1, PSNR, SSIM.

All metrics take float images in [0, 1] shaped [3, H, W] (or any matching
shapes for L1/PSNR) and are symmetric in their two arguments.
"""
from __future__ import annotations

import math

import torch
import torch.nn.functional as F

from .exceptions import DimensionError

#: PSNR reported for bit-identical images (MSE == 0)
PSNR_CAP_DB = 100.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _check_pair(a: torch.Tensor, b: torch.Tensor):
    if a.shape != b.shape:
        raise DimensionError(
            f"metric inputs must share a shape, got {tuple(a.shape)} vs "
            f"{tuple(b.shape)}")


def l1_metric(a: torch.Tensor, b: torch.Tensor) -> float:
    """Mean absolute error over all elements."""
    _check_pair(a, b)
    return float((a.double() - b.double()).abs().mean())


def psnr(a: torch.Tensor, b: torch.Tensor) -> float:
    """10*log10(1 / MSE) in dB for unit dynamic range, capped at 100 dB."""
    _check_pair(a, b)
    mse = float(((a.double() - b.double()) ** 2).mean())
    if mse <= 0.0:
        return PSNR_CAP_DB
    return min(10.0 * math.log10(1.0 / mse), PSNR_CAP_DB)


def _gaussian_kernel1d(size: int, sigma: float) -> torch.Tensor:
    half = (size - 1) / 2.0
    x = torch.arange(size, dtype=torch.float64) - half
    k = torch.exp(-(x ** 2) / (2.0 * sigma * sigma))
    return k / k.sum()


def _local_mean(x: torch.Tensor, kernel: torch.Tensor) -> torch.Tensor:
    """Separable valid-mode Gaussian filtering of [C, H, W]."""
    c = x.shape[0]
    kh = kernel.view(1, 1, -1, 1).expand(c, 1, -1, 1)
    kw = kernel.view(1, 1, 1, -1).expand(c, 1, 1, -1)
    x = x.unsqueeze(0)
    x = F.conv2d(x, kh, groups=c)
    x = F.conv2d(x, kw, groups=c)
    return x.squeeze(0)


def ssim(a: torch.Tensor, b: torch.Tensor) -> float:
    """Mean local SSIM: 11x11 Gaussian window (sigma 1.5), K1=0.01,
    K2=0.03, dynamic range 1.0, computed per channel and averaged."""
    _check_pair(a, b)
    if a.dim() != 3:
        raise DimensionError(f"expected [C, H, W] images, got {a.dim()} dims")
    h, w = a.shape[-2:]
    if min(h, w) < SSIM_WINDOW:
        raise DimensionError(
            f"image {h}x{w} smaller than the {SSIM_WINDOW}px SSIM window")
    x = a.detach().double()
    y = b.detach().double()
    kernel = _gaussian_kernel1d(SSIM_WINDOW, SSIM_SIGMA)
    mu_x = _local_mean(x, kernel)
    mu_y = _local_mean(y, kernel)
    var_x = _local_mean(x * x, kernel) - mu_x ** 2
    var_y = _local_mean(y * y, kernel) - mu_y ** 2
    cov = _local_mean(x * y, kernel) - mu_x * mu_y
    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2
    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x ** 2 + mu_y ** 2 + c1) * (var_x + var_y + c2)
    return float((num / den).mean())
