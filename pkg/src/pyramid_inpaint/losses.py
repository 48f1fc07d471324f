"""Loss terms and the per-level aggregate objectives.

Population expectations are realized as means over batch and spatial
positions. All losses are plain functions of tensors; the aggregate
helpers additionally return a name->value breakdown so training logs and
ablation checks can inspect individual terms.
"""
from __future__ import annotations

import dataclasses

import torch
import torch.nn.functional as F

from .exceptions import DimensionError


@dataclasses.dataclass
class LossWeights:
    """Objective coefficients plus the two ablation toggles.

    ``style`` is indexed by texture level (level 1 uses style[0], ...);
    levels beyond the tuple reuse its last entry.
    """

    adv: float = 0.001
    rec: float = 0.1
    perc: float = 0.1
    style: tuple = (1.0, 50.0, 120.0, 250.0)
    use_consistency: bool = True
    two_stage: bool = True

    def __post_init__(self):
        if self.adv < 0 or self.rec < 0 or self.perc < 0 or \
                any(s < 0 for s in self.style):
            raise ValueError("loss weights must be >= 0")

    def style_for_level(self, level: int) -> float:
        if level < 1:
            raise ValueError("style weights are indexed by texture level >= 1")
        return self.style[min(level - 1, len(self.style) - 1)]


def hinge_d(real_scores: torch.Tensor, fake_scores: torch.Tensor):
    """Discriminator hinge: mean ReLU(1 - real) + mean ReLU(1 + fake)."""
    return F.relu(1.0 - real_scores).mean() + F.relu(1.0 + fake_scores).mean()


def hinge_g(fake_scores: torch.Tensor):
    """Generator hinge: -mean(fake scores)."""
    return -fake_scores.mean()


def consistency_loss(d_composite, d_real, d_fake, m):
    """Mean squared gap between the discriminator's score on the composite
    and the mask-weighted composite of its real/fake scores."""
    if not (d_composite.shape == d_real.shape == d_fake.shape):
        raise DimensionError("discriminator score maps must share a shape")
    if d_composite.shape[-2:] != m.shape[-2:]:
        raise DimensionError("mask spatial size must match the score maps")
    target = d_real * (1.0 - m) + d_fake * m
    return ((d_composite - target) ** 2).mean()


def l1_recon(pred: torch.Tensor, target: torch.Tensor):
    """Whole-image mean absolute error."""
    if pred.shape != target.shape:
        raise DimensionError("prediction and target shapes differ")
    return (pred - target).abs().mean()


def perceptual_loss(pred, target, extractor):
    """Sum over extractor layers of the per-element L1 feature distance."""
    total = None
    for fp, ft in zip(extractor(pred), extractor(target)):
        term = (fp - ft).abs().mean()
        total = term if total is None else total + term
    return total


def gram(features: torch.Tensor) -> torch.Tensor:
    """Channel inner-product matrix, normalized by C*H*W: [N, C, C]."""
    n, c, h, w = features.shape
    flat = features.reshape(n, c, h * w)
    return flat @ flat.transpose(1, 2) / (c * h * w)


def style_loss(pred, target, extractor):
    """Sum over layers of the L1 distance between Gram matrices
    (summed over the C x C entries, averaged over the batch)."""
    total = None
    for fp, ft in zip(extractor(pred), extractor(target)):
        term = (gram(fp) - gram(ft)).abs().sum(dim=(1, 2)).mean()
        total = term if total is None else total + term
    return total


def discriminator_loss_level0(d_real, d_fake, d_composite, m,
                              weights: LossWeights):
    """Content-level D objective: hinge plus (optionally) consistency."""
    terms = {"adv": hinge_d(d_real, d_fake)}
    if weights.use_consistency:
        terms["cons"] = consistency_loss(d_composite, d_real, d_fake, m)
    return sum(terms.values()), terms


def generator_loss_level0(d_fake, x_pred, x_real, weights: LossWeights):
    """Content-level G objective: lambda_a * hinge + lambda_r * L1.

    The adversarial/reconstruction coefficients apply to every generator,
    the content one included.
    """
    terms = {"adv": weights.adv * hinge_g(d_fake),
             "l1": weights.rec * l1_recon(x_pred, x_real)}
    return sum(terms.values()), terms


def discriminator_loss_texture(d_real, d_fake):
    terms = {"adv": hinge_d(d_real, d_fake)}
    return terms["adv"], terms


def generator_loss_texture(d_fake, x_sr, x_refined, x_real, extractor,
                           weights: LossWeights, level: int):
    """Texture-level G objective.

    lambda_a * hinge + (L1 + perceptual + style) on the refined output,
    and on the SR output too when two-stage mode is active, all against
    the real image with the level's style weight.
    """
    lam_s = weights.style_for_level(level)
    terms = {"adv": weights.adv * hinge_g(d_fake)}
    outputs = {"refined": x_refined}
    if weights.two_stage:
        if x_sr is None:
            raise DimensionError(
                "two-stage weighting requires the SR output; got None")
        outputs["sr"] = x_sr
    for name, out in outputs.items():
        terms[f"l1_{name}"] = weights.rec * l1_recon(out, x_real)
        terms[f"perc_{name}"] = weights.perc * perceptual_loss(out, x_real,
                                                               extractor)
        terms[f"style_{name}"] = lam_s * style_loss(out, x_real, extractor)
    return sum(terms.values()), terms


def total_losses_level0(d_real, d_fake, d_composite, m, x_pred, x_real,
                        weights: LossWeights):
    """Both level-0 objectives at once (verification surface).

    Training alternates the two sides; this helper evaluates them on a
    single set of batch outputs.
    """
    l_d, d_terms = discriminator_loss_level0(d_real, d_fake, d_composite, m,
                                             weights)
    l_g, g_terms = generator_loss_level0(d_fake, x_pred, x_real, weights)
    return l_d, l_g, d_terms, g_terms


def total_losses_level_i(d_real, d_fake, x_sr, x_refined, x_real, extractor,
                         weights: LossWeights, level: int):
    """Both texture-level objectives at once (verification surface)."""
    l_d, d_terms = discriminator_loss_texture(d_real, d_fake)
    l_g, g_terms = generator_loss_texture(d_fake, x_sr, x_refined, x_real,
                                          extractor, weights, level)
    return l_d, l_g, d_terms, g_terms
