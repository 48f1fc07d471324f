"""Bucketed evaluation harness: run a model over a dataset, score the
composited outputs, and aggregate by mask-hole ratio."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
from pathlib import Path

import numpy as np
import torch

from . import masks as mask_ops
from .data import ImageFolderDataset
from .exceptions import InputError
from .masks import MaskSpec, hole_ratio, ratio_bucket
from .metrics import l1_metric, psnr, ssim
from .pyramid import apply_mask

CENTER_BUCKET = "center"

#: row order in emitted tables
BUCKET_ORDER = [label for _, _, label in mask_ops.RATIO_BUCKETS] + \
    [mask_ops.OUT_OF_RANGE_BUCKET, CENTER_BUCKET]


@dataclasses.dataclass
class ImageResult:
    path: str
    bucket: str
    hole_ratio: float
    l1: float
    psnr: float
    ssim: float


@dataclasses.dataclass
class BucketStats:
    count: int = 0
    l1_mean: float | None = None
    psnr_mean: float | None = None
    ssim_mean: float | None = None


@dataclasses.dataclass
class EvalReport:
    """Metric aggregates bucketed by mask-hole ratio plus a config echo."""

    model_id: str
    resolution: int
    mask_source: str
    buckets: dict[str, BucketStats]
    per_image: list[ImageResult]
    notes: list[str] = dataclasses.field(default_factory=list)

    @property
    def total_count(self) -> int:
        return sum(b.count for b in self.buckets.values())

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "resolution": self.resolution,
            "mask_source": self.mask_source,
            "notes": self.notes,
            "buckets": {k: dataclasses.asdict(v)
                        for k, v in self.buckets.items()},
            "per_image": [dataclasses.asdict(r) for r in self.per_image],
        }


def _aggregate(per_image: list[ImageResult]) -> dict[str, BucketStats]:
    buckets: dict[str, BucketStats] = {}
    by_bucket: dict[str, list[ImageResult]] = {}
    for rec in per_image:
        by_bucket.setdefault(rec.bucket, []).append(rec)
    for label, records in by_bucket.items():
        buckets[label] = BucketStats(
            count=len(records),
            l1_mean=float(np.mean([r.l1 for r in records])),
            psnr_mean=float(np.mean([r.psnr for r in records])),
            ssim_mean=float(np.mean([r.ssim for r in records])),
        )
    return buckets


def _mask_for_image(mask_source, image, index, rng):
    """Resolve the mask source for one dataset image.

    Returns (mask tensor, bucket label, note or None).
    """
    h, w = image.shape[-2:]
    note = None
    if isinstance(mask_source, (str, Path)) and str(mask_source) == "center":
        mask = mask_ops.gen_center_mask(h, w)
        return mask, CENTER_BUCKET, note
    if isinstance(mask_source, MaskSpec):
        if mask_source.kind == "center":
            return mask_ops.gen_center_mask(h, w), CENTER_BUCKET, note
        spec = dataclasses.replace(mask_source, seed=mask_source.seed + index)
        mask = mask_ops.gen_freeform_mask(h, w, spec)
        return mask, ratio_bucket(hole_ratio(mask)), note
    # directory of mask files, cycled in sorted order
    mask_dir = Path(mask_source)
    if not mask_dir.is_dir():
        raise InputError(f"mask source {mask_source} is not a directory")
    files = sorted(p for p in mask_dir.iterdir()
                   if p.suffix.lower() in {".png", ".pgm", ".bmp", ".jpg",
                                           ".jpeg", ".tif", ".tiff"})
    if not files:
        raise InputError(f"no mask files under {mask_dir}")
    path = files[index % len(files)]
    with_resize = mask_ops.load_mask_file(path, expected_size=(h, w),
                                          allow_resize=True)
    from PIL import Image
    with Image.open(path) as probe:
        if probe.size != (w, h):
            note = (f"mask {path.name} resized nearest-neighbor from "
                    f"{probe.size[1]}x{probe.size[0]} to {h}x{w}")
    return with_resize, ratio_bucket(hole_ratio(with_resize)), note


def evaluate(dataset_root, mask_source, inpaint_fn, resolution: int,
             model_id: str = "model", seed: int = 0,
             limit: int | None = None) -> EvalReport:
    """Score ``inpaint_fn`` over every dataset image.

    ``inpaint_fn(z, m) -> y`` receives the masked image and mask at the
    requested resolution and returns the full composited output.
    ``mask_source`` is "center", a MaskSpec, or a directory of mask files.
    Deterministic for a fixed (dataset, mask_source, seed).
    """
    dataset = ImageFolderDataset(dataset_root, resolution)
    rng = np.random.default_rng(seed)
    per_image: list[ImageResult] = []
    notes: list[str] = []
    count = len(dataset) if limit is None else min(limit, len(dataset))
    for index in range(count):
        image = dataset.get(index, rng)
        mask, bucket, note = _mask_for_image(mask_source, image, index, rng)
        if note:
            notes.append(note)
        z = apply_mask(image, mask)
        with torch.no_grad():
            output = inpaint_fn(z, mask)
        per_image.append(ImageResult(
            path=str(dataset.paths[index]),
            bucket=bucket,
            hole_ratio=hole_ratio(mask),
            l1=l1_metric(output, image),
            psnr=psnr(output, image),
            ssim=ssim(output, image),
        ))
    source_label = (mask_source.kind if isinstance(mask_source, MaskSpec)
                    else str(mask_source))
    return EvalReport(model_id=model_id, resolution=resolution,
                      mask_source=source_label,
                      buckets=_aggregate(per_image), per_image=per_image,
                      notes=notes)


def _rows(report: EvalReport):
    for label in BUCKET_ORDER:
        stats = report.buckets.get(label, BucketStats())
        yield label, stats


def emit_table(report: EvalReport, fmt: str = "text") -> str:
    """Serialize the report; text columns follow Mask | Method | L1 |
    PSNR | SSIM. Empty buckets report count 0 with blank means."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["Mask", "Method", "L1 Loss", "PSNR", "SSIM", "Count"])
        for label, stats in _rows(report):
            writer.writerow([
                label, report.model_id,
                "" if stats.l1_mean is None else f"{stats.l1_mean:.4f}",
                "" if stats.psnr_mean is None else f"{stats.psnr_mean:.2f}",
                "" if stats.ssim_mean is None else f"{stats.ssim_mean:.4f}",
                stats.count,
            ])
        return buf.getvalue()
    if fmt != "text":
        raise InputError(f"unknown table format {fmt!r}")
    header = (f"model: {report.model_id}  resolution: {report.resolution}  "
              f"masks: {report.mask_source}  images: {report.total_count}")
    lines = [header]
    lines.extend(f"note: {n}" for n in report.notes)
    lines.append(f"{'Mask':<10} {'Method':<16} {'L1 Loss':>8} "
                 f"{'PSNR':>7} {'SSIM':>7} {'Count':>6}")
    for label, stats in _rows(report):
        l1 = "" if stats.l1_mean is None else f"{stats.l1_mean:.4f}"
        ps = "" if stats.psnr_mean is None else f"{stats.psnr_mean:.2f}"
        ss = "" if stats.ssim_mean is None else f"{stats.ssim_mean:.4f}"
        lines.append(f"{label:<10} {report.model_id:<16} {l1:>8} "
                     f"{ps:>7} {ss:>7} {stats.count:>6}")
    return "\n".join(lines) + "\n"
