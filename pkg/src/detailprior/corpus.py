"""Natural-image test corpus built from the images bundled with scikit-image.

Crops are drawn at seeded random positions; near-flat crops (luminance
standard deviation below ``min_std``) are rejected so every crop carries
texture or edges.
"""

from __future__ import annotations

import numpy as np

from detailprior.image_core import as_image, luminance

NATURAL_IMAGES = (
    "astronaut",
    "coffee",
    "chelsea",
    "rocket",
    "camera",
    "brick",
    "grass",
    "gravel",
    "coins",
    "clock",
    "immunohistochemistry",
    "moon",
    "hubble_deep_field",
    "text",
    "page",
)


def load_natural(name: str) -> np.ndarray:
    import skimage.data

    return as_image(getattr(skimage.data, name)())


def natural_crops(count: int, size: int = 32, seed: int = 0, min_std: float = 4.0, rgb_only: bool = False):
    """``count`` crops of ``size`` x ``size``, cycling through the source images."""
    rng = np.random.default_rng(seed)
    names = [n for n in NATURAL_IMAGES if not rgb_only or load_natural(n).shape[2] == 3]
    sources = {n: load_natural(n) for n in names}
    crops = []
    attempts = 0
    while len(crops) < count:
        name = names[attempts % len(names)]
        attempts += 1
        if attempts > 100 * count:
            raise RuntimeError("could not find enough textured crops")
        img = sources[name]
        h, w = img.shape[:2]
        top = int(rng.integers(0, h - size + 1))
        left = int(rng.integers(0, w - size + 1))
        crop = img[top : top + size, left : left + size]
        if luminance(crop).std() < min_std:
            continue
        crops.append(crop.copy())
    return crops


def noise_planes(count: int, size: int = 32, seed: int = 0):
    rng = np.random.default_rng(seed)
    return [rng.uniform(0.0, 255.0, size=(size, size)) for _ in range(count)]
