"""Exception types shared across the package."""


class PyramidInpaintError(Exception):
    """Base class for all package errors."""


class DimensionError(PyramidInpaintError, ValueError):
    """Tensor/image shapes are inconsistent with an operation's contract."""


class DegenerateInputError(PyramidInpaintError, ValueError):
    """Numerically degenerate input (e.g. an all-zero weight matrix)."""


class InputError(PyramidInpaintError, ValueError):
    """Unreadable or malformed external input (files, payloads)."""


class DependencyError(PyramidInpaintError, RuntimeError):
    """A required artifact (checkpoint, pretrained weights) is missing."""


class TrainingDivergedError(PyramidInpaintError, RuntimeError):
    """A non-finite loss or parameter was produced during training."""
