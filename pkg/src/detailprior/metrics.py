"""PSNR, SSIM and detail sparsity statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from detailprior.image_core import as_image

SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
PEAK = 255.0


@dataclass(frozen=True)
class SparsityStats:
    l1_mean: float
    near_zero_fraction: float
    threshold: float


def psnr(a, b) -> float:
    """PSNR over all samples; ``math.inf`` for identical inputs."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / mse)


def _gaussian_window(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    x = np.arange(size) - (size - 1) / 2
    g = np.exp(-(x * x) / (2 * sigma * sigma))
    return g / g.sum()


def _valid_filter(x, g):
    """Separable 'valid' correlation with a fixed tap order."""
    k = g.size
    h, w = x.shape
    rows = np.zeros((h - k + 1, w))
    for i in range(k):
        rows += g[i] * x[i : i + h - k + 1]
    out = np.zeros((h - k + 1, w - k + 1))
    for j in range(k):
        out += g[j] * rows[:, j : j + w - k + 1]
    return out


def ssim(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 2:
        raise ValueError(f"need equal 2-D planes, got {a.shape} vs {b.shape}")
    if min(a.shape) < SSIM_WINDOW:
        raise ValueError(f"planes must be at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    c1 = (SSIM_K1 * PEAK) ** 2
    c2 = (SSIM_K2 * PEAK) ** 2
    g = _gaussian_window()
    mu_a = _valid_filter(a, g)
    mu_b = _valid_filter(b, g)
    mu_aa, mu_bb, mu_ab = mu_a * mu_a, mu_b * mu_b, mu_a * mu_b
    var_a = _valid_filter(a * a, g) - mu_aa
    var_b = _valid_filter(b * b, g) - mu_bb
    cov = _valid_filter(a * b, g) - mu_ab
    num = (2 * mu_ab + c1) * (2 * cov + c2)
    den = (mu_aa + mu_bb + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def shave(image, border: int) -> np.ndarray:
    """Drop ``border`` pixels from every side before scoring."""
    img = as_image(image)
    if border <= 0:
        return img
    if 2 * border >= min(img.shape[:2]):
        raise ValueError(f"crop border {border} leaves nothing of a {img.shape[1]}x{img.shape[0]} image")
    return img[border:-border, border:-border]


def sparsity_stats(detail, mode: str = "multiplicative", threshold: float = 0.01) -> SparsityStats:
    """Mean magnitude and near-zero fraction of a detail layer.

    Multiplicative layers are measured as ``|log2(d)|``; additive layers as
    ``|d| / (max - min)``, falling back to ``|d|`` on a flat layer.
    """
    d = np.asarray(detail, dtype=np.float64)
    if mode == "multiplicative":
        if np.any(d <= 0):
            raise ValueError("multiplicative detail must be strictly positive")
        mag = np.abs(np.log2(d))
    elif mode == "additive":
        span = float(d.max() - d.min())
        mag = np.abs(d) / span if span > 0 else np.abs(d)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return SparsityStats(float(mag.mean()), float(np.mean(mag < threshold)), threshold)
