"""The four architectures: content generator/discriminator for the coarsest
level and texture generator/discriminator for every higher level.

All generators are fully convolutional and emit values in [0, 1] through a
sigmoid head. Discriminators are patch discriminators with spectral
normalization on every layer.
"""
import torch
import torch.nn as nn
import torch.nn.functional as F

from .exceptions import DimensionError
from .layers import GatedConv2d, GatedRRDB, SNConv2d, sub_pixel_upsample
from .pyramid import composite


class ContentGenerator(nn.Module):
    """Completes content in the coarsest masked image.

    Input is the masked image concatenated with its mask (4 channels).
    A gated-conv stem feeds two parallel branches split along channels —
    a dilated branch (dilations 2, 4, 8, 16) for global structure and a
    plain branch for local content — whose concatenation passes through a
    gated head ending in a plain conv + sigmoid.
    """

    def __init__(self, width: int = 64):
        super().__init__()
        if width % 2:
            raise DimensionError("content generator width must be even")
        half = width // 2
        self.width = width
        self.stem = nn.Sequential(
            GatedConv2d(4, width, 5),
            GatedConv2d(width, width, 3),
            GatedConv2d(width, width, 3),
            GatedConv2d(width, width, 3),
        )
        self.branch_dilated = nn.Sequential(
            GatedConv2d(half, half, 3, dilation=2),
            GatedConv2d(half, half, 3, dilation=4),
            GatedConv2d(half, half, 3, dilation=8),
            GatedConv2d(half, half, 3, dilation=16),
        )
        self.branch_plain = nn.Sequential(
            GatedConv2d(half, half, 3),
            GatedConv2d(half, half, 3),
            GatedConv2d(half, half, 3),
            GatedConv2d(half, half, 3),
        )
        self.head = nn.Sequential(
            GatedConv2d(width, width, 3),
            GatedConv2d(width, width, 3),
            GatedConv2d(width, width, 3),
            nn.Conv2d(width, 3, 3, padding=1),
        )

    def forward(self, z, m):
        if z.shape[-2:] != m.shape[-2:]:
            raise DimensionError("image and mask spatial sizes differ")
        h = self.stem(torch.cat([z, m], dim=1))
        upper, lower = h.chunk(2, dim=1)
        h = torch.cat([self.branch_dilated(upper), self.branch_plain(lower)],
                      dim=1)
        return torch.sigmoid(self.head(h))


class ContentDiscriminator(nn.Module):
    """Per-pixel patch discriminator: 8 spectrally-normalized stride-1
    convs, so the score map keeps the input's spatial size."""

    def __init__(self, width: int = 64):
        super().__init__()
        layers = [SNConv2d(3, width, 5)]
        layers += [SNConv2d(width, width, 3) for _ in range(6)]
        self.convs = nn.ModuleList(layers)
        self.out = SNConv2d(width, 1, 3)

    def forward(self, img):
        h = img
        for conv in self.convs:
            h = F.leaky_relu(conv(h), 0.2)
        return self.out(h)

    def calibrate(self, n_iterations: int = 50):
        for conv in self.convs:
            conv.calibrate(n_iterations)
        self.out.calibrate(n_iterations)


class SuperResolutionStage(nn.Module):
    """Doubles resolution: conv stem, two gated RRDBs, channel expansion,
    sub-pixel shuffle. ``to_image`` maps features to an RGB prediction."""

    def __init__(self, width: int = 64):
        super().__init__()
        self.stem = nn.Conv2d(3, width, 3, padding=1)
        self.rrdb = nn.Sequential(GatedRRDB(width), GatedRRDB(width))
        self.expand = nn.Conv2d(width, width * 4, 3, padding=1)
        self.to_image = nn.Conv2d(width, 3, 3, padding=1)

    def features(self, y_prev):
        h = self.stem(y_prev)
        h = self.rrdb(h)
        return sub_pixel_upsample(self.expand(h))

    def forward(self, y_prev):
        return torch.sigmoid(self.to_image(self.features(y_prev)))


class RefinementStage(nn.Module):
    """Six-layer refinement: five gated convs with an additive shortcut
    from layer 1's output to layer 5's output, then a plain conv head."""

    def __init__(self, in_channels: int, width: int = 64):
        super().__init__()
        self.conv1 = GatedConv2d(in_channels, width, 5)
        self.middle = nn.Sequential(
            GatedConv2d(width, width, 3),
            GatedConv2d(width, width, 3),
            GatedConv2d(width, width, 3),
            GatedConv2d(width, width, 3),
        )
        self.out = nn.Conv2d(width, 3, 3, padding=1)

    def forward(self, x):
        h1 = self.conv1(x)
        h = self.middle(h1) + h1
        return torch.sigmoid(self.out(h))


class TextureGenerator(nn.Module):
    """Synthesizes texture at double the previous level's resolution.

    Two-stage (default): the SR stage predicts an upscaled image from the
    lower level's inpainting result; that prediction replaces the hole of
    the current-scale masked input, and the refinement stage polishes the
    combination (mask appended so it knows which pixels are synthetic).

    One-stage ablation: the SR stage's upsampled feature maps feed the
    refinement network directly and no coarse prediction exists.
    """

    def __init__(self, width: int = 64, two_stage: bool = True):
        super().__init__()
        self.width = width
        self.two_stage = two_stage
        self.sr_stage = SuperResolutionStage(width)
        self.refine_stage = RefinementStage(4 if two_stage else width, width)

    def forward(self, z, m, y_prev):
        if z.shape[-2:] != m.shape[-2:]:
            raise DimensionError("image and mask spatial sizes differ")
        zh, zw = z.shape[-2:]
        ph, pw = y_prev.shape[-2:]
        if (zh, zw) != (2 * ph, 2 * pw):
            raise DimensionError(
                f"masked input {zh}x{zw} must be exactly double the "
                f"previous result {ph}x{pw}")
        if not self.two_stage:
            return None, self.refine_stage(self.sr_stage.features(y_prev))
        x_sr = self.sr_stage(y_prev)
        intermediate = composite(z, m, x_sr)
        x_refined = self.refine_stage(torch.cat([intermediate, m], dim=1))
        return x_sr, x_refined


class TextureDiscriminator(nn.Module):
    """Patch discriminator with four stride-2 SN convs (the score map is
    input/16 per side) and a stride-1 SN conv head."""

    def __init__(self, widths=(64, 128, 256, 256)):
        super().__init__()
        w0, w1, w2, w3 = widths
        self.convs = nn.ModuleList([
            SNConv2d(3, w0, 5, stride=2),
            SNConv2d(w0, w1, 3, stride=2),
            SNConv2d(w1, w2, 3, stride=2),
            SNConv2d(w2, w3, 3, stride=2),
        ])
        self.out = SNConv2d(w3, 1, 3)

    def forward(self, img):
        h, w = img.shape[-2:]
        if h % 16 or w % 16:
            raise DimensionError(
                f"texture discriminator input {h}x{w} must be divisible by 16")
        x = img
        for conv in self.convs:
            x = F.leaky_relu(conv(x), 0.2)
        return self.out(x)

    def calibrate(self, n_iterations: int = 50):
        for conv in self.convs:
            conv.calibrate(n_iterations)
        self.out.calibrate(n_iterations)


def build_generator(level: int, width: int = 64, two_stage: bool = True):
    if level == 0:
        return ContentGenerator(width)
    return TextureGenerator(width, two_stage=two_stage)


def build_discriminator(level: int, width: int = 64):
    if level == 0:
        return ContentDiscriminator(width)
    return TextureDiscriminator()
