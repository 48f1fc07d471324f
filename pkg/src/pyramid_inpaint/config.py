"""Training configuration: a key/value tree loadable from YAML with
CLI-style dotted overrides."""
from __future__ import annotations

import dataclasses
from pathlib import Path

import yaml

from .exceptions import InputError
from .losses import LossWeights


@dataclasses.dataclass
class TrainConfig:
    dataset_root: str = ""
    checkpoint_dir: str = "checkpoints"
    base_resolution: int = 64
    level_count: int = 5
    scale_factor: int = 2
    batch_size: int | list = 8
    steps_per_level: int | list = 2000
    lr_generator: float = 1e-4
    lr_discriminator: float = 4e-4
    adam_betas: tuple = (0.5, 0.999)
    seed: int = 0
    width_content: int = 64
    width_texture: int = 64
    mask_center_fraction: float = 0.5
    freeform_params: dict = dataclasses.field(default_factory=dict)
    loss: LossWeights = dataclasses.field(default_factory=LossWeights)
    extractor: dict = dataclasses.field(
        default_factory=lambda: {"name": "random", "seed": 0})
    log_every: int = 50
    sample_every: int = 500
    checkpoint_every: int = 500
    device: str = "cpu"

    def __post_init__(self):
        if self.level_count < 1 or self.base_resolution < 1:
            raise InputError("level_count and base_resolution must be >= 1")
        if self.scale_factor < 2:
            raise InputError("scale_factor must be >= 2")
        for name in ("batch_size", "steps_per_level"):
            v = getattr(self, name)
            values = v if isinstance(v, list) else [v]
            if any(int(x) < 1 for x in values):
                raise InputError(f"{name} entries must be positive")

    @property
    def full_resolution(self) -> int:
        return self.base_resolution * self.scale_factor ** (self.level_count - 1)

    def _per_level(self, value, level: int) -> int:
        if isinstance(value, list):
            return int(value[min(level, len(value) - 1)])
        return int(value)

    def steps_for_level(self, level: int) -> int:
        return self._per_level(self.steps_per_level, level)

    def batch_for_level(self, level: int) -> int:
        return self._per_level(self.batch_size, level)

    def resolution_for_level(self, level: int) -> int:
        return self.base_resolution * self.scale_factor ** level

    @classmethod
    def from_dict(cls, raw: dict) -> "TrainConfig":
        raw = dict(raw)
        if "loss" in raw and isinstance(raw["loss"], dict):
            loss = dict(raw["loss"])
            if "style" in loss:
                loss["style"] = tuple(loss["style"])
            raw["loss"] = LossWeights(**loss)
        if "adam_betas" in raw:
            raw["adam_betas"] = tuple(raw["adam_betas"])
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise InputError(f"unknown config keys {sorted(unknown)}")
        return cls(**raw)

    @classmethod
    def from_yaml(cls, path) -> "TrainConfig":
        try:
            raw = yaml.safe_load(Path(path).read_text())
        except Exception as exc:
            raise InputError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise InputError(f"config {path} must hold a mapping")
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["loss"]["style"] = list(self.loss.style)
        d["adam_betas"] = list(self.adam_betas)
        return d

    def with_overrides(self, overrides: list[str]) -> "TrainConfig":
        """Apply ``dotted.key=value`` overrides (values parsed as YAML)."""
        raw = self.to_dict()
        for item in overrides:
            if "=" not in item:
                raise InputError(f"override {item!r} must look like key=value")
            key, _, value = item.partition("=")
            node = raw
            parts = key.strip().split(".")
            for part in parts[:-1]:
                if part not in node or not isinstance(node[part], dict):
                    raise InputError(f"unknown config key {key!r}")
                node = node[part]
            if parts[-1] not in node:
                raise InputError(f"unknown config key {key!r}")
            node[parts[-1]] = yaml.safe_load(value)
        return TrainConfig.from_dict(raw)
