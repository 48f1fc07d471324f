"""Checkpoint persistence.

Layout: one directory per level under the checkpoint root::

    <root>/level_0/manifest.yaml   # human-readable metadata
    <root>/level_0/params.npz      # parameter blob

Blob format ``npz-state-v1``: a numpy ``.npz`` archive whose keys are
``generator/<state_dict_key>``, ``discriminator/<state_dict_key>`` and
``opt_{g,d}/<parameter_name>/{step,exp_avg,exp_avg_sq}`` (Adam moments,
keyed by the owning network's parameter name). float32 arrays round-trip
bit-exactly. See docs/checkpoint-format.md.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
import yaml

from .exceptions import DependencyError, InputError

FORMAT_VERSION = 1
BLOB_FORMAT = "npz-state-v1"
MANIFEST_NAME = "manifest.yaml"
BLOB_NAME = "params.npz"


def level_dir(root, level: int) -> Path:
    return Path(root) / f"level_{level}"


def _state_to_arrays(prefix: str, state: dict, out: dict):
    for key, tensor in state.items():
        out[f"{prefix}/{key}"] = tensor.detach().cpu().numpy()


def _optimizer_to_arrays(prefix: str, optimizer, named_params, out: dict):
    """Serialize Adam moments keyed by parameter name."""
    id_to_name = {id(p): n for n, p in named_params}
    for group in optimizer.param_groups:
        for p in group["params"]:
            state = optimizer.state.get(p)
            if not state:
                continue
            name = id_to_name[id(p)]
            for field in ("step", "exp_avg", "exp_avg_sq"):
                value = state[field]
                if not torch.is_tensor(value):
                    value = torch.tensor(float(value))
                out[f"{prefix}/{name}/{field}"] = value.detach().cpu().numpy()


def save_level_checkpoint(root, level: int, generator, discriminator=None,
                          opt_g=None, opt_d=None, manifest: dict | None = None):
    """Write the manifest and the parameter blob for one level."""
    target = level_dir(root, level)
    target.mkdir(parents=True, exist_ok=True)
    arrays: dict[str, np.ndarray] = {}
    _state_to_arrays("generator", generator.state_dict(), arrays)
    if discriminator is not None:
        _state_to_arrays("discriminator", discriminator.state_dict(), arrays)
    if opt_g is not None:
        _optimizer_to_arrays("opt_g", opt_g,
                             list(generator.named_parameters()), arrays)
    if opt_d is not None and discriminator is not None:
        _optimizer_to_arrays("opt_d", opt_d,
                             list(discriminator.named_parameters()), arrays)
    np.savez(target / BLOB_NAME, **arrays)
    doc = {"format_version": FORMAT_VERSION, "blob": BLOB_NAME,
           "blob_format": BLOB_FORMAT, "level": level}
    doc.update(manifest or {})
    (target / MANIFEST_NAME).write_text(yaml.safe_dump(doc, sort_keys=True))


def read_manifest(root, level: int) -> dict:
    path = level_dir(root, level) / MANIFEST_NAME
    if not path.is_file():
        raise DependencyError(f"missing checkpoint manifest {path}")
    doc = yaml.safe_load(path.read_text())
    if not isinstance(doc, dict):
        raise InputError(f"malformed manifest {path}")
    if doc.get("format_version") != FORMAT_VERSION:
        raise InputError(
            f"unsupported checkpoint format_version in {path}: "
            f"{doc.get('format_version')!r}")
    return doc


def load_blob(root, level: int) -> dict[str, np.ndarray]:
    path = level_dir(root, level) / BLOB_NAME
    if not path.is_file():
        raise DependencyError(f"missing checkpoint blob {path}")
    with np.load(path) as blob:
        return {k: blob[k] for k in blob.files}


def _arrays_to_state(prefix: str, arrays: dict) -> dict:
    skip = len(prefix) + 1
    return {k[skip:]: torch.from_numpy(v.copy())
            for k, v in arrays.items() if k.startswith(prefix + "/")}


def load_module_state(module, arrays: dict, prefix: str):
    state = _arrays_to_state(prefix, arrays)
    if not state:
        raise DependencyError(f"checkpoint blob holds no {prefix!r} entries")
    module.load_state_dict(state)


def load_optimizer_state(optimizer, arrays: dict, prefix: str, named_params):
    """Restore Adam moments previously saved by parameter name."""
    by_name = {}
    skip = len(prefix) + 1
    for key, value in arrays.items():
        if not key.startswith(prefix + "/"):
            continue
        name, _, field = key[skip:].rpartition("/")
        by_name.setdefault(name, {})[field] = value
    if not by_name:
        return
    for name, param in named_params:
        fields = by_name.get(name)
        if fields is None:
            continue
        optimizer.state[param] = {
            "step": torch.from_numpy(fields["step"].copy()),
            "exp_avg": torch.from_numpy(fields["exp_avg"].copy()),
            "exp_avg_sq": torch.from_numpy(fields["exp_avg_sq"].copy()),
        }


def completed_levels(root) -> list[int]:
    """Indices of contiguous-from-zero levels with readable manifests."""
    levels = []
    i = 0
    while (level_dir(root, i) / MANIFEST_NAME).is_file():
        levels.append(i)
        i += 1
    return levels
