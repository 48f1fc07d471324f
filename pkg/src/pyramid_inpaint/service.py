"""HTTP inference service.

Endpoints (all responses JSON with a stable ``schema_version``):

* ``POST /v1/inpaint`` — JSON envelope with base64 rasters, or multipart
  form with ``image``/``mask`` files; returns the inpainted PNG (base64).
* ``GET /v1/models`` — registry listing.
* ``GET /v1/health`` — liveness/readiness.

Configuration via env vars: ``PYRAMID_INPAINT_PORT``,
``PYRAMID_INPAINT_REGISTRY``, ``PYRAMID_INPAINT_MAX_BYTES``,
``PYRAMID_INPAINT_MAX_CONCURRENCY``.
"""
from __future__ import annotations

import base64
import binascii
import io
import os
import threading
import time
from contextlib import asynccontextmanager
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
import yaml
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from PIL import Image

from .data import image_to_tensor, tensor_to_image
from .exceptions import DependencyError, InputError
from .inference import PyramidGenerators, infer_pyramid

SCHEMA_VERSION = "1"
DEFAULT_PAYLOAD_LIMIT = 32 * 1024 * 1024
DEFAULT_MAX_CONCURRENCY = 2

ENV_PORT = "PYRAMID_INPAINT_PORT"
ENV_REGISTRY = "PYRAMID_INPAINT_REGISTRY"
ENV_PAYLOAD_LIMIT = "PYRAMID_INPAINT_MAX_BYTES"
ENV_MAX_CONCURRENCY = "PYRAMID_INPAINT_MAX_CONCURRENCY"


class ModelRegistryEntry:
    def __init__(self, model_id: str, checkpoint_dir: str):
        self.model_id = model_id
        self.checkpoint_dir = checkpoint_dir
        self.generators: PyramidGenerators | None = None

    @property
    def loaded(self) -> bool:
        return self.generators is not None

    def load(self):
        self.generators = PyramidGenerators.load(self.checkpoint_dir)

    def describe(self) -> dict:
        info = {"model_id": self.model_id, "loaded": self.loaded}
        if self.loaded:
            info["level_count"] = self.generators.level_count
            info["full_resolution"] = self.generators.full_resolution
            info["scale_factor"] = self.generators.scale_factor
        return info


class ModelRegistry:
    """Checkpoints shared read-only across requests."""

    def __init__(self, entries: list[ModelRegistryEntry]):
        self.entries = {e.model_id: e for e in entries}
        if len(self.entries) != len(entries):
            raise InputError("duplicate model_id in registry")
        self.ready = False

    @classmethod
    def from_config(cls, path) -> "ModelRegistry":
        raw = yaml.safe_load(Path(path).read_text())
        if not isinstance(raw, dict) or "models" not in raw:
            raise InputError(f"registry {path} must hold a 'models' list")
        entries = [ModelRegistryEntry(m["model_id"], m["checkpoint_dir"])
                   for m in raw["models"]]
        return cls(entries)

    def load_all(self):
        for entry in self.entries.values():
            entry.load()
        self.ready = True

    def get(self, model_id: str) -> ModelRegistryEntry:
        entry = self.entries.get(model_id)
        if entry is None or not entry.loaded:
            raise HTTPException(status_code=404,
                                detail=f"unknown model_id {model_id!r}")
        return entry


def _decode_raster(data: bytes, what: str) -> Image.Image:
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
        return img
    except Exception:
        raise HTTPException(status_code=422,
                            detail=f"{what} is not a decodable raster")


def _b64decode(field: str, value) -> bytes:
    if not isinstance(value, str):
        raise HTTPException(status_code=422,
                            detail=f"{field} must be a base64 string")
    try:
        return base64.b64decode(value, validate=True)
    except (binascii.Error, ValueError):
        raise HTTPException(status_code=422,
                            detail=f"{field} is not valid base64")


def _pad_to_multiple(x: torch.Tensor, m: torch.Tensor, multiple: int):
    """Edge-pad image (zero-pad mask) on the bottom/right so both sides
    divide ``multiple``. Returns (x, m, (orig_h, orig_w), padded)."""
    h, w = x.shape[-2:]
    pad_h = (-h) % multiple
    pad_w = (-w) % multiple
    if pad_h == 0 and pad_w == 0:
        return x, m, (h, w), False
    x = F.pad(x.unsqueeze(0), (0, pad_w, 0, pad_h),
              mode="replicate").squeeze(0)
    m = F.pad(m.unsqueeze(0), (0, pad_w, 0, pad_h), mode="constant",
              value=0.0).squeeze(0)
    return x, m, (h, w), True


#: formats we can re-emit without loss; anything else comes back as PNG
LOSSLESS_FORMATS = {"PNG": "image/png", "BMP": "image/bmp",
                    "TIFF": "image/tiff", "PPM": "image/x-portable-pixmap"}


def _encode_raster(tensor: torch.Tensor, fmt: str | None):
    """Encode losslessly, keeping the request's format when possible."""
    fmt = fmt if fmt in LOSSLESS_FORMATS else "PNG"
    buf = io.BytesIO()
    tensor_to_image(tensor).save(buf, format=fmt)
    return (base64.b64encode(buf.getvalue()).decode("ascii"),
            LOSSLESS_FORMATS[fmt])


async def _parse_inpaint_request(request: Request, payload_limit: int):
    body = await request.body()
    if len(body) > payload_limit:
        raise HTTPException(status_code=413,
                            detail=f"payload exceeds {payload_limit} bytes")
    content_type = request.headers.get("content-type", "")
    if content_type.startswith("multipart/form-data"):
        form = await request.form()
        parts = {}
        for field in ("image", "mask"):
            part = form.get(field)
            if part is None or not hasattr(part, "read"):
                raise HTTPException(
                    status_code=422,
                    detail=f"multipart needs an {field} file part")
            parts[field] = await part.read()
        image_bytes, mask_bytes = parts["image"], parts["mask"]
        model_id = form.get("model_id", "default")
        want_inter = str(form.get("return_intermediates", "false")).lower() \
            in ("1", "true", "yes")
    else:
        try:
            payload = await request.json()
        except Exception:
            raise HTTPException(status_code=422, detail="invalid JSON body")
        if not isinstance(payload, dict):
            raise HTTPException(status_code=422,
                                detail="JSON body must be an object")
        for field in ("image", "mask"):
            if field not in payload:
                raise HTTPException(status_code=422,
                                    detail=f"missing field {field!r}")
        image_bytes = _b64decode("image", payload["image"])
        mask_bytes = _b64decode("mask", payload["mask"])
        model_id = payload.get("model_id", "default")
        want_inter = bool(payload.get("return_intermediates", False))
    return image_bytes, mask_bytes, str(model_id), want_inter


def create_app(registry: ModelRegistry | str | None = None,
               payload_limit: int | None = None,
               max_concurrency: int | None = None) -> FastAPI:
    """Build the service; checkpoints load during startup (lifespan)."""
    if registry is None:
        registry = os.environ.get(ENV_REGISTRY)
        if registry is None:
            raise InputError(f"no registry given and {ENV_REGISTRY} unset")
    if isinstance(registry, (str, Path)):
        registry = ModelRegistry.from_config(registry)
    if payload_limit is None:
        payload_limit = int(os.environ.get(ENV_PAYLOAD_LIMIT,
                                           DEFAULT_PAYLOAD_LIMIT))
    if max_concurrency is None:
        max_concurrency = int(os.environ.get(ENV_MAX_CONCURRENCY,
                                             DEFAULT_MAX_CONCURRENCY))

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        try:
            registry.load_all()
        except DependencyError as exc:
            raise RuntimeError(f"cannot load registered models: {exc}")
        yield
        registry.ready = False

    app = FastAPI(title="pyramid-inpaint", lifespan=lifespan)
    app.state.registry = registry
    gate = threading.Semaphore(max_concurrency)

    @app.exception_handler(HTTPException)
    async def _http_error(request, exc: HTTPException):
        return JSONResponse(status_code=exc.status_code,
                            content={"schema_version": SCHEMA_VERSION,
                                     "error": exc.detail})

    @app.get("/v1/health")
    async def health():
        return {"schema_version": SCHEMA_VERSION, "live": True,
                "ready": registry.ready}

    @app.get("/v1/models")
    async def models():
        return {"schema_version": SCHEMA_VERSION,
                "models": [e.describe() for e in registry.entries.values()]}

    @app.post("/v1/inpaint")
    async def inpaint(request: Request):
        image_bytes, mask_bytes, model_id, want_inter = \
            await _parse_inpaint_request(request, payload_limit)
        entry = registry.get(model_id)
        decoded = _decode_raster(image_bytes, "image")
        source_format = decoded.format
        image = decoded.convert("RGB")
        mask_img = _decode_raster(mask_bytes, "mask").convert("L")
        if image.size != mask_img.size:
            raise HTTPException(
                status_code=422,
                detail=f"image {image.size} and mask {mask_img.size} "
                "dimensions differ")
        x = image_to_tensor(image)
        mask_arr = np.asarray(mask_img, dtype=np.uint8)
        m = torch.from_numpy((mask_arr >= 128).astype("float32")).unsqueeze(0)

        gens = entry.generators
        multiple = gens.scale_factor ** (gens.level_count - 1)
        x_pad, m_pad, (h, w), padded = _pad_to_multiple(x, m, multiple)
        started = time.perf_counter()
        with gate:
            y, inter = infer_pyramid(x_pad * (1.0 - m_pad) + m_pad, m_pad,
                                     gens, return_intermediates=want_inter)
        timing_ms = (time.perf_counter() - started) * 1000.0
        # known pixels come from the unpadded original, bit-exact
        y = x * (1.0 - m) + y[:, :h, :w] * m
        encoded, media_type = _encode_raster(y, source_format)
        response = {
            "schema_version": SCHEMA_VERSION,
            "model_id": model_id,
            "image": encoded,
            "media_type": media_type,
            "width": w,
            "height": h,
            "timing_ms": timing_ms,
            "adjustment": {
                "applied": padded,
                "original_size": [h, w],
                "padded_size": list(x_pad.shape[-2:]),
            },
        }
        if want_inter:
            response["intermediates"] = [_encode_raster(r.y, "PNG")[0]
                                         for r in inter]
        return response

    return app


def serve(registry_path=None, port: int | None = None,
          payload_limit: int | None = None):
    """Run the service under uvicorn (blocking)."""
    import uvicorn
    if port is None:
        port = int(os.environ.get(ENV_PORT, 8000))
    app = create_app(registry_path, payload_limit=payload_limit)
    uvicorn.run(app, host="0.0.0.0", port=port)
