"""Progressive pyramid of patch GANs for image inpainting."""

from .config import TrainConfig
from .exceptions import (DegenerateInputError, DependencyError,
                         DimensionError, InputError, PyramidInpaintError,
                         TrainingDivergedError)
from .inference import PyramidGenerators, infer_pyramid
from .losses import LossWeights
from .masks import MaskSpec, gen_center_mask, gen_freeform_mask, hole_ratio, ratio_bucket
from .pyramid import PyramidSample, apply_mask, build_pyramid, composite

__version__ = "0.1.0"

__all__ = [
    "TrainConfig",
    "PyramidGenerators",
    "infer_pyramid",
    "LossWeights",
    "MaskSpec",
    "gen_center_mask",
    "gen_freeform_mask",
    "hole_ratio",
    "ratio_bucket",
    "PyramidSample",
    "apply_mask",
    "build_pyramid",
    "composite",
    "PyramidInpaintError",
    "DimensionError",
    "DegenerateInputError",
    "InputError",
    "DependencyError",
    "TrainingDivergedError",
    "__version__",
]
