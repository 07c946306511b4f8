"""Multiplicative detail layers: extraction, enhancement and base/detail split."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from detailprior.image_core import (
    ImageWriteError,
    as_image,
    atomic_output,
    luminance,
    replace_luminance,
)
from detailprior.solver import (
    DENSE_MAX_PIXELS,
    SolverParams,
    build_vector_field,
    fidelity_weights,
    solve_dense,
    solve_fast,
)


@dataclass
class DetailLayer:
    """Strictly positive single-channel detail layer, ``2 ** log_detail``."""

    values: np.ndarray
    params: SolverParams = field(default_factory=SolverParams)

    @property
    def shape(self):
        return self.values.shape

    @property
    def log2(self) -> np.ndarray:
        return np.log2(self.values)


@dataclass(frozen=True)
class EnhancementConfig:
    gain: float = 1.0
    clamp: tuple[float, float] = (0.0, 255.0)

    def __post_init__(self):
        if not self.gain >= 0:
            raise ValueError(f"gain must be >= 0, got {self.gain}")


def _prepare(image, params: SolverParams):
    y = luminance(image)
    if y.shape[0] < 2 or y.shape[1] < 2:
        raise ValueError(f"image must be at least 2x2, got {y.shape[1]}x{y.shape[0]}")
    vf = build_vector_field(y, params.alpha)
    return vf, fidelity_weights(vf, params.gamma, params.epsilon)


def extract_detail(image, params: SolverParams | None = None, threads: int = 1) -> DetailLayer:
    params = params or SolverParams()
    vf, weights = _prepare(image, params)
    return DetailLayer(np.exp2(solve_fast(vf, weights, params, threads=threads)), params)


def extract_detail_exact(image, params: SolverParams | None = None) -> DetailLayer:
    params = params or SolverParams()
    h, w = as_image(image).shape[:2]
    if h * w > DENSE_MAX_PIXELS:
        raise ValueError(f"{w}x{h} image exceeds the exact solver limit of {DENSE_MAX_PIXELS} pixels")
    vf, weights = _prepare(image, params)
    return DetailLayer(np.exp2(solve_dense(vf, weights, params.lam)), params)


def _detail_values(detail, shape):
    values = detail.values if isinstance(detail, DetailLayer) else np.asarray(detail, dtype=np.float64)
    if values.shape != shape:
        raise ValueError(f"detail shape {values.shape} does not match image {shape}")
    return values


def enhance(image, detail, config: EnhancementConfig | None = None) -> np.ndarray:
    config = config or EnhancementConfig()
    img = as_image(image)
    d = _detail_values(detail, img.shape[:2])
    lo, hi = config.clamp
    y = np.clip(luminance(img) * d**config.gain, lo, hi)
    return replace_luminance(img, y)


def base_layer(image, detail) -> np.ndarray:
    img = as_image(image)
    d = _detail_values(detail, img.shape[:2])
    if np.any(d <= 0):
        raise ValueError("detail layer must be strictly positive")
    return luminance(img) / d


def save_visualization(values, path) -> tuple[float, float]:
    """Write ``values`` as a 16-bit grayscale PNG spanning [min, max].

    The range is recorded next to the PNG in ``<stem>.range``.
    """
    path = Path(path)
    values = np.asarray(values, dtype=np.float64)
    lo, hi = float(values.min()), float(values.max())
    if hi > lo:
        scaled = (values - lo) / (hi - lo) * 65535.0
    else:
        scaled = np.zeros_like(values)
    ok, buf = cv2.imencode(".png", np.floor(scaled + 0.5).astype(np.uint16))
    if not ok:
        raise ImageWriteError(path, "PNG encoding failed")
    range_path = path.with_suffix(".range")
    try:
        with atomic_output(path) as tmp:
            tmp.write_bytes(buf.tobytes())
        with atomic_output(range_path) as tmp:
            tmp.write_text(f"{lo!r} {hi!r}\n")
    except OSError as exc:
        raise ImageWriteError(path, exc.strerror or str(exc)) from exc
    return lo, hi
