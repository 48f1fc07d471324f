"""Progressive level-by-level adversarial training.

Level 0 trains the content GAN on the coarsest images; each texture level
trains against composites produced on the fly by the already-trained,
frozen lower levels. Levels alternate one discriminator and one generator
update per step.
"""
from __future__ import annotations

import csv
import dataclasses
import logging
import time
from pathlib import Path

import numpy as np
import torch

from . import checkpoint as ckpt
from .config import TrainConfig
from .data import ImageFolderDataset, tensor_to_image
from .exceptions import DependencyError, TrainingDivergedError
from .features import make_extractor
from .losses import (discriminator_loss_level0, discriminator_loss_texture,
                     generator_loss_level0, generator_loss_texture)
from .masks import MaskSpec, gen_center_mask, gen_freeform_mask
from .networks import build_discriminator, build_generator
from .pyramid import build_pyramid, composite

logger = logging.getLogger(__name__)


@dataclasses.dataclass
class LevelBundle:
    """Parameters and optimizer state for one {G_i, D_i} pair."""

    level: int
    generator: torch.nn.Module
    discriminator: torch.nn.Module
    opt_g: torch.optim.Adam
    opt_d: torch.optim.Adam
    steps_completed: int = 0


def build_level_bundle(level: int, config: TrainConfig) -> LevelBundle:
    """Fresh networks and optimizers for one level, seeded per level."""
    torch.manual_seed(config.seed * 1009 + level)
    width = config.width_content if level == 0 else config.width_texture
    generator = build_generator(level, width=width,
                                two_stage=config.loss.two_stage)
    discriminator = build_discriminator(level, width=config.width_content)
    opt_g = torch.optim.Adam(generator.parameters(), lr=config.lr_generator,
                             betas=config.adam_betas)
    opt_d = torch.optim.Adam(discriminator.parameters(),
                             lr=config.lr_discriminator,
                             betas=config.adam_betas)
    return LevelBundle(level, generator, discriminator, opt_g, opt_d)


def _manifest(level: int, config: TrainConfig, steps: int) -> dict:
    return {
        "level": level,
        "level_count": config.level_count,
        "scale_factor": config.scale_factor,
        "base_resolution": config.base_resolution,
        "level_resolution": config.resolution_for_level(0),
        "full_resolution": config.full_resolution,
        "widths": {"content": config.width_content,
                   "texture": config.width_texture},
        "loss_toggles": {"use_consistency": config.loss.use_consistency,
                         "two_stage": config.loss.two_stage},
        "optimizer": {"lr_generator": config.lr_generator,
                      "lr_discriminator": config.lr_discriminator,
                      "betas": list(config.adam_betas)},
        "steps_completed": steps,
        "seed": config.seed,
    }


def load_frozen_generators(config: TrainConfig, upto: int) -> list:
    """Trained generators for levels 0..upto-1, eval mode, grads off."""
    frozen = []
    for i in range(upto):
        manifest = ckpt.read_manifest(config.checkpoint_dir, i)
        width = config.width_content if i == 0 else config.width_texture
        gen = build_generator(i, width=width,
                              two_stage=bool(manifest.get("loss_toggles", {})
                                             .get("two_stage", True)))
        ckpt.load_module_state(
            gen, ckpt.load_blob(config.checkpoint_dir, i), "generator")
        gen.eval()
        for p in gen.parameters():
            p.requires_grad_(False)
        frozen.append(gen)
    return frozen


def sample_training_mask(height: int, width: int, config: TrainConfig,
                         rng: np.random.Generator) -> torch.Tensor:
    """Center or free-form mask per the configured mix."""
    if rng.random() < config.mask_center_fraction:
        return gen_center_mask(height, width)
    seed = int(rng.integers(0, 2 ** 62))
    spec = MaskSpec.freeform(seed=seed, **config.freeform_params)
    return gen_freeform_mask(height, width, spec)


def make_batch(dataset: ImageFolderDataset, config: TrainConfig,
               rng: np.random.Generator, level: int):
    """Batched pyramid levels 0..level for one training step."""
    size = config.full_resolution
    batch = config.batch_for_level(level)
    images = torch.stack([dataset.sample(rng) for _ in range(batch)])
    masks = torch.stack([sample_training_mask(size, size, config, rng)
                         for _ in range(batch)])
    sample = build_pyramid(images, masks, config.level_count,
                           config.scale_factor)
    return sample.levels[: level + 1]


def chain_generators(generators: list, levels, upto: int) -> torch.Tensor:
    """Composite chain through levels 0..upto (inclusive), batched."""
    y = None
    for i in range(upto + 1):
        lv = levels[i]
        if i == 0:
            pred = generators[0](lv.z, lv.m)
        else:
            _, pred = generators[i](lv.z, lv.m, y)
        y = composite(lv.z, lv.m, pred)
    return y


def masked_region_l1(generators: list, dataset: ImageFolderDataset,
                     config: TrainConfig, level: int,
                     eval_seed: int = 8421) -> float:
    """Mean L1 over hole pixels of the level's composite vs. the original.

    Uses a fixed, seed-derived mask per image so measurements taken at
    different training steps are comparable.
    """
    modes = [g.training for g in generators]
    for g in generators:
        g.eval()
    total, weight = 0.0, 0.0
    size = config.full_resolution
    with torch.no_grad():
        for idx in range(len(dataset)):
            rng = np.random.default_rng(eval_seed + idx)
            image = dataset.get(idx, rng)
            if idx % 2 == 0:
                mask = gen_center_mask(size, size)
            else:
                mask = gen_freeform_mask(
                    size, size, MaskSpec.freeform(seed=eval_seed + idx,
                                                  **config.freeform_params))
            sample = build_pyramid(image.unsqueeze(0), mask.unsqueeze(0),
                                   config.level_count, config.scale_factor)
            y = chain_generators(generators, sample.levels, level)
            lv = sample.levels[level]
            holes = float(lv.m.sum())
            if holes == 0:
                continue
            total += float(((y - lv.x).abs() * lv.m).sum())
            weight += holes * lv.x.shape[1]
    for g, mode in zip(generators, modes):
        g.train(mode)
    return total / max(weight, 1.0)


def _save_sample_grid(path: Path, lv, pred, y):
    """One PNG row per sample: masked input | prediction | composite | real."""
    rows = []
    for i in range(min(4, lv.x.shape[0])):
        rows.append(torch.cat([lv.z[i], pred[i], y[i], lv.x[i]], dim=2))
    grid = torch.cat(rows, dim=1)
    path.parent.mkdir(parents=True, exist_ok=True)
    tensor_to_image(grid.detach()).save(path)


class _TermLog:
    """CSV logger whose columns are fixed by the first step's terms."""

    def __init__(self, path: Path):
        self.path = path
        self._writer = None
        self._file = None
        self._columns = None

    def log(self, step: int, loss_d: float, loss_g: float, d_terms: dict,
            g_terms: dict, extra: dict | None = None):
        record = {"step": step, "loss_d": loss_d, "loss_g": loss_g}
        record.update({f"d_{k}": float(v.detach()) for k, v in d_terms.items()})
        record.update({f"g_{k}": float(v.detach()) for k, v in g_terms.items()})
        record.update(extra or {})
        if self._writer is None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._file = open(self.path, "w", newline="")
            self._columns = list(record)
            self._writer = csv.DictWriter(self._file, fieldnames=self._columns)
            self._writer.writeheader()
        self._writer.writerow({k: record.get(k, "") for k in self._columns})
        self._file.flush()

    def close(self):
        if self._file is not None:
            self._file.close()


def _check_finite(step: int, level: int, **losses):
    for name, value in losses.items():
        if not torch.isfinite(value):
            raise TrainingDivergedError(
                f"non-finite {name} ({float(value)}) at level {level} "
                f"step {step}; last saved checkpoint retained")


def train_level(level: int, config: TrainConfig,
                dataset: ImageFolderDataset | None = None) -> dict:
    """Train one {G_i, D_i} pair; lower levels must already be trained.

    Returns a summary dict with the masked-region L1 measured before and
    after training and the paths of the emitted artifacts.
    """
    if level >= config.level_count:
        raise DependencyError(
            f"level {level} outside the configured pyramid "
            f"(level_count={config.level_count})")
    dataset = dataset or ImageFolderDataset(config.dataset_root,
                                            config.full_resolution)
    frozen = load_frozen_generators(config, level)  # DependencyError if absent
    bundle = build_level_bundle(level, config)
    rng = np.random.default_rng(config.seed + 7919 * level)
    extractor = None
    if level >= 1:
        extractor = make_extractor(**config.extractor)
    weights = config.loss
    steps = config.steps_for_level(level)
    out_dir = ckpt.level_dir(config.checkpoint_dir, level)
    log = _TermLog(out_dir / "training_log.csv")
    all_gens = frozen + [bundle.generator]

    l1_start = masked_region_l1(all_gens, dataset, config, level)
    started = time.time()
    logger.info("level %d: %d steps, masked L1 at step 0 = %.4f",
                level, steps, l1_start)

    try:
        for step in range(steps):
            levels = make_batch(dataset, config, rng, level)
            lv = levels[level]
            if level == 0:
                pred = bundle.generator(lv.z, lv.m)
                fake = pred.detach()
                d_real = bundle.discriminator(lv.x)
                d_fake = bundle.discriminator(fake)
                d_comp = bundle.discriminator(composite(lv.z, lv.m, fake))
                loss_d, d_terms = discriminator_loss_level0(
                    d_real, d_fake, d_comp, lv.m, weights)
                bundle.opt_d.zero_grad()
                loss_d.backward()
                bundle.opt_d.step()

                loss_g, g_terms = generator_loss_level0(
                    bundle.discriminator(pred), pred, lv.x, weights)
                bundle.opt_g.zero_grad()
                loss_g.backward()
                bundle.opt_g.step()
                sample_pred = pred
            else:
                with torch.no_grad():
                    y_prev = chain_generators(frozen, levels, level - 1)
                x_sr, x_ref = bundle.generator(lv.z, lv.m, y_prev)
                d_real = bundle.discriminator(lv.x)
                d_fake = bundle.discriminator(x_ref.detach())
                loss_d, d_terms = discriminator_loss_texture(d_real, d_fake)
                bundle.opt_d.zero_grad()
                loss_d.backward()
                bundle.opt_d.step()

                loss_g, g_terms = generator_loss_texture(
                    bundle.discriminator(x_ref), x_sr, x_ref, lv.x,
                    extractor, weights, level)
                bundle.opt_g.zero_grad()
                loss_g.backward()
                bundle.opt_g.step()
                sample_pred = x_ref
            _check_finite(step, level, loss_d=loss_d, loss_g=loss_g)
            bundle.steps_completed = step + 1

            if step % config.log_every == 0 or step == steps - 1:
                log.log(step, float(loss_d.detach()), float(loss_g.detach()),
                        d_terms, g_terms)
            if config.sample_every and (step + 1) % config.sample_every == 0:
                with torch.no_grad():
                    y = composite(lv.z, lv.m, sample_pred)
                _save_sample_grid(out_dir / "samples" / f"step_{step + 1}.png",
                                  lv, sample_pred, y)
            if config.checkpoint_every and \
                    (step + 1) % config.checkpoint_every == 0:
                _save_bundle(bundle, config)
    finally:
        log.close()

    _save_bundle(bundle, config)
    l1_end = masked_region_l1(all_gens, dataset, config, level)
    elapsed = time.time() - started
    logger.info("level %d done in %.1fs: masked L1 %.4f -> %.4f",
                level, elapsed, l1_start, l1_end)
    return {
        "level": level,
        "steps": bundle.steps_completed,
        "masked_l1_start": l1_start,
        "masked_l1_end": l1_end,
        "seconds": elapsed,
        "checkpoint_dir": str(out_dir),
        "bundle": bundle,
    }


def _save_bundle(bundle: LevelBundle, config: TrainConfig):
    for p in bundle.generator.parameters():
        if not torch.isfinite(p).all():
            raise TrainingDivergedError(
                f"non-finite generator parameter at level {bundle.level}; "
                "last saved checkpoint retained")
    ckpt.save_level_checkpoint(
        config.checkpoint_dir, bundle.level, bundle.generator,
        bundle.discriminator, bundle.opt_g, bundle.opt_d,
        manifest=_manifest(bundle.level, config, bundle.steps_completed))


def load_level_bundle(level: int, config: TrainConfig) -> LevelBundle:
    """Rebuild a LevelBundle (networks + optimizer state) from disk."""
    manifest = ckpt.read_manifest(config.checkpoint_dir, level)
    arrays = ckpt.load_blob(config.checkpoint_dir, level)
    bundle = build_level_bundle(level, config)
    ckpt.load_module_state(bundle.generator, arrays, "generator")
    ckpt.load_module_state(bundle.discriminator, arrays, "discriminator")
    ckpt.load_optimizer_state(bundle.opt_g, arrays, "opt_g",
                              list(bundle.generator.named_parameters()))
    ckpt.load_optimizer_state(bundle.opt_d, arrays, "opt_d",
                              list(bundle.discriminator.named_parameters()))
    bundle.steps_completed = int(manifest.get("steps_completed", 0))
    return bundle


def train_all(config: TrainConfig) -> list[dict]:
    """Train every level in order; completed levels are skipped so a run
    can resume from the first unfinished level."""
    dataset = ImageFolderDataset(config.dataset_root, config.full_resolution)
    results = []
    for level in range(config.level_count):
        target_steps = config.steps_for_level(level)
        try:
            manifest = ckpt.read_manifest(config.checkpoint_dir, level)
            if int(manifest.get("steps_completed", 0)) >= target_steps:
                logger.info("level %d already trained (%s steps), skipping",
                            level, manifest.get("steps_completed"))
                results.append({"level": level, "skipped": True,
                                "checkpoint_dir":
                                    str(ckpt.level_dir(config.checkpoint_dir,
                                                       level))})
                continue
        except DependencyError:
            pass
        results.append(train_level(level, config, dataset=dataset))
    return results
