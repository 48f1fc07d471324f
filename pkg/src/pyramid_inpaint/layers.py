"""Differentiable layer primitives shared by every network in the pyramid.

Gated convolutions compute ``ELU(conv_f(x)) * sigmoid(conv_g(x))`` so the
network can soft-select which spatial positions carry valid information.
All stride-1 layers pad with zeros so spatial size is preserved.
"""
import torch
import torch.nn as nn
import torch.nn.functional as F

from .exceptions import DegenerateInputError, DimensionError


def _same_padding(kernel_size: int, dilation: int) -> int:
    return dilation * (kernel_size - 1) // 2


def gated_conv2d(x, feature_weight, feature_bias, gate_weight, gate_bias,
                 stride: int = 1, dilation: int = 1):
    """Functional gated convolution.

    ``out = ELU(conv(x; feature)) * sigmoid(conv(x; gate))``. Feature and
    gate kernels must have identical shape and an odd kernel size; padding
    keeps H, W unchanged at stride 1.
    """
    if feature_weight.shape != gate_weight.shape:
        raise DimensionError(
            f"feature kernel {tuple(feature_weight.shape)} and gate kernel "
            f"{tuple(gate_weight.shape)} must have identical shape")
    k = feature_weight.shape[-1]
    if k % 2 == 0:
        raise DimensionError(f"kernel size must be odd, got {k}")
    if x.shape[1] != feature_weight.shape[1]:
        raise DimensionError(
            f"input has {x.shape[1]} channels, kernel expects "
            f"{feature_weight.shape[1]}")
    pad = _same_padding(k, dilation)
    feat = F.conv2d(x, feature_weight, feature_bias, stride=stride,
                    padding=pad, dilation=dilation)
    gate = F.conv2d(x, gate_weight, gate_bias, stride=stride,
                    padding=pad, dilation=dilation)
    return F.elu(feat) * torch.sigmoid(gate)


class GatedConv2d(nn.Module):
    """Gated convolution layer (feature branch + learned sigmoid gate).

    Gate biases start at +2 so gates open near 0.88 at init; a zero init
    would attenuate activations and gradients by ~0.5 per layer, leaving
    deep stacks almost untrainable early on.
    """

    GATE_BIAS_INIT = 2.0

    def __init__(self, in_channels, out_channels, kernel_size,
                 stride: int = 1, dilation: int = 1):
        super().__init__()
        if kernel_size % 2 == 0:
            raise DimensionError(f"kernel size must be odd, got {kernel_size}")
        pad = _same_padding(kernel_size, dilation)
        self.feature = nn.Conv2d(in_channels, out_channels, kernel_size,
                                 stride=stride, padding=pad, dilation=dilation)
        self.gate = nn.Conv2d(in_channels, out_channels, kernel_size,
                              stride=stride, padding=pad, dilation=dilation)
        nn.init.constant_(self.gate.bias, self.GATE_BIAS_INIT)
        self.in_channels = in_channels
        self.stride = stride
        self.dilation = dilation

    def forward(self, x):
        if x.shape[1] != self.in_channels:
            raise DimensionError(
                f"input has {x.shape[1]} channels, layer expects "
                f"{self.in_channels}")
        return F.elu(self.feature(x)) * torch.sigmoid(self.gate(x))


def sub_pixel_upsample(x):
    """Rearrange ``[N, 4C, H, W]`` into ``[N, C, 2H, 2W]``.

    ``out[n, c, 2h+dy, 2w+dx] = in[n, 4c + 2dy + dx, h, w]`` — a pure
    permutation of elements, so values are preserved exactly.
    """
    if x.dim() != 4:
        raise DimensionError(f"expected a 4-d tensor, got {x.dim()} dims")
    if x.shape[1] % 4 != 0:
        raise DimensionError(
            f"channel count {x.shape[1]} is not divisible by 4")
    return F.pixel_shuffle(x, 2)


class DenseGatedBlock(nn.Module):
    """Five densely-wired gated convolutions producing a residual delta.

    conv_j consumes the block input concatenated with every previous
    conv output; convs 1-4 emit ``growth`` channels, conv 5 maps back to
    the block width. Returns the raw conv-5 output (zero when the feature
    kernels are zero), not the residual sum.
    """

    def __init__(self, channels: int, growth: int | None = None):
        super().__init__()
        g = growth if growth is not None else channels // 2
        self.convs = nn.ModuleList([
            GatedConv2d(channels + i * g, g, 3) for i in range(4)
        ])
        self.convs.append(GatedConv2d(channels + 4 * g, channels, 3))

    def forward(self, x):
        feats = [x]
        for conv in self.convs[:-1]:
            feats.append(conv(torch.cat(feats, dim=1)))
        return self.convs[-1](torch.cat(feats, dim=1))


class GatedRRDB(nn.Module):
    """Residual-in-residual dense block built from gated convolutions.

    Three dense blocks are chained with scaled inner residuals
    (``u <- u + beta * block(u)``) and the output is the input plus the
    scaled accumulated delta: ``x + beta * (chain(x) - x)``. Identity when
    all feature kernels are zero or ``beta == 0``.
    """

    def __init__(self, channels: int, residual_scale: float = 0.2,
                 growth: int | None = None):
        super().__init__()
        if not 0.0 <= residual_scale <= 1.0:
            raise ValueError("residual_scale must lie in [0, 1]")
        self.blocks = nn.ModuleList(
            [DenseGatedBlock(channels, growth) for _ in range(3)])
        self.residual_scale = residual_scale

    def forward(self, x):
        beta = self.residual_scale
        u = x
        for block in self.blocks:
            u = u + beta * block(u)
        return x + beta * (u - x)


def _power_iteration(w_mat, u, steps: int):
    """Run power iterations on ``w_mat`` [C_out, rest]; returns (u, v)."""
    v = F.normalize(w_mat.t() @ u, dim=0, eps=1e-12)
    for _ in range(steps):
        u = F.normalize(w_mat @ v, dim=0, eps=1e-12)
        v = F.normalize(w_mat.t() @ u, dim=0, eps=1e-12)
    return u, v


def spectral_normalize(weight, u, n_power_iterations: int = 1):
    """Divide ``weight`` by its power-iteration top singular value.

    ``weight`` is reshaped to ``[C_out, rest]``; ``u`` is the persistent
    left singular vector estimate. Returns ``(normalized_weight, u, sigma)``
    with ``u`` re-normalized after the update.
    """
    if not torch.any(weight != 0):
        raise DegenerateInputError(
            "spectral normalization of an all-zero weight (sigma = 0)")
    w_mat = weight.reshape(weight.shape[0], -1)
    with torch.no_grad():
        u_new, v = _power_iteration(w_mat, u, max(n_power_iterations, 1))
    sigma = torch.einsum("i,ij,j->", u_new, w_mat, v)
    return weight / sigma, u_new, sigma


class SNConv2d(nn.Module):
    """Conv2d whose weight is spectrally normalized at call time.

    Keeps a persistent estimate ``u`` of the top left singular vector;
    one power iteration refreshes it per training-mode forward.
    ``calibrate`` runs extra iterations so the estimate converges (used
    before inspecting normalized weights).
    """

    def __init__(self, in_channels, out_channels, kernel_size,
                 stride: int = 1, power_iterations: int = 1):
        super().__init__()
        pad = _same_padding(kernel_size, 1)
        self.conv = nn.Conv2d(in_channels, out_channels, kernel_size,
                              stride=stride, padding=pad)
        self.power_iterations = power_iterations
        u = torch.randn(out_channels)
        self.register_buffer("u", F.normalize(u, dim=0, eps=1e-12))

    def _sigma(self, update: bool):
        w_mat = self.conv.weight.reshape(self.conv.weight.shape[0], -1)
        with torch.no_grad():
            steps = self.power_iterations if update else 0
            u, v = _power_iteration(w_mat, self.u, steps)
            if update:
                self.u.copy_(u)
        return torch.einsum("i,ij,j->", u, w_mat, v)

    def normalized_weight(self):
        return self.conv.weight / self._sigma(update=False)

    def calibrate(self, n_iterations: int = 50):
        w_mat = self.conv.weight.reshape(self.conv.weight.shape[0], -1)
        with torch.no_grad():
            u, _ = _power_iteration(w_mat, self.u, n_iterations)
            self.u.copy_(u)

    def forward(self, x):
        sigma = self._sigma(update=self.training)
        return F.conv2d(x, self.conv.weight / sigma, self.conv.bias,
                        stride=self.conv.stride, padding=self.conv.padding)
