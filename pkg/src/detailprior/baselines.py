"""Additive base/detail decompositions used for comparison.

Both smoothers produce a base layer; the detail is the signed residual
``Y - base`` and is added (not multiplied) back when merging.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from detailprior.image_core import as_image, luminance, replace_luminance
from detailprior.solver import (
    DENSE_MAX_PIXELS,
    FidelityWeights,
    VectorField,
    alternating_solve,
    lambda_schedule,
    solve_dense,
)

METHODS = ("gif", "msdm")
DEFAULT_PARAMS = {
    "gif": {"radius": 2, "eps": 0.3},
    "msdm": {"lambda_s": 1.0, "alpha_exp": 1.2},
}
WLS_WEIGHT_FLOOR = 1e-4
WLS_ITERATIONS = 4


@dataclass
class AdditiveDecomposition:
    base: np.ndarray
    detail: np.ndarray
    method: str
    params: dict = field(default_factory=dict)


def box_mean(x, radius: int) -> np.ndarray:
    """Mean over the (2r+1)^2 window clipped to the image, via an integral image."""
    x = np.asarray(x, dtype=np.float64)
    h, w = x.shape
    integral = np.zeros((h + 1, w + 1))
    integral[1:, 1:] = x.cumsum(axis=0).cumsum(axis=1)
    i = np.arange(h)
    j = np.arange(w)
    i0, i1 = np.clip(i - radius, 0, h), np.clip(i + radius + 1, 0, h)
    j0, j1 = np.clip(j - radius, 0, w), np.clip(j + radius + 1, 0, w)
    sums = (
        integral[np.ix_(i1, j1)]
        - integral[np.ix_(i0, j1)]
        - integral[np.ix_(i1, j0)]
        + integral[np.ix_(i0, j0)]
    )
    counts = np.outer(i1 - i0, j1 - j0)
    return sums / counts


def guided_filter(p, guide, radius: int = 2, eps: float = 0.3) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    guide = np.asarray(guide, dtype=np.float64)
    if p.shape != guide.shape or p.ndim != 2:
        raise ValueError(f"input {p.shape} and guide {guide.shape} must be equal 2-D shapes")
    if radius < 1 or not eps > 0:
        raise ValueError(f"need radius >= 1 and eps > 0, got {radius}, {eps}")
    # the filter commutes with constant offsets; centring keeps flat inputs exact
    p_ref = p.flat[0]
    g = (guide - guide.flat[0]) / 255.0
    q = (p - p_ref) / 255.0
    mean_g = box_mean(g, radius)
    mean_q = box_mean(q, radius)
    cov = box_mean(g * q, radius) - mean_g * mean_q
    var = box_mean(g * g, radius) - mean_g * mean_g
    a = cov / (var + eps)
    b = mean_q - a * mean_g
    out = box_mean(a, radius) * g + box_mean(b, radius)
    return out * 255.0 + p_ref


def _wls_weights(y, alpha_exp):
    ell = np.log10(y / 255.0 + WLS_WEIGHT_FLOOR)
    return FidelityWeights(
        1.0 / (np.abs(np.diff(ell, axis=1)) ** alpha_exp + WLS_WEIGHT_FLOOR),
        1.0 / (np.abs(np.diff(ell, axis=0)) ** alpha_exp + WLS_WEIGHT_FLOOR),
    )


def wls_smooth(y, lambda_s: float = 1.0, alpha_exp: float = 1.2, exact: bool | None = None, threads: int = 1) -> np.ndarray:
    """Edge-preserving WLS smoothing of a luminance plane in [0, 255].

    Solved for the offset ``u - y``, whose target gradient field is ``-grad(y)``,
    so the same solvers as the detail extraction apply. ``exact=None`` picks the
    dense solver when the plane is small enough.
    """
    y = np.asarray(y, dtype=np.float64)
    if not lambda_s >= 0 or not alpha_exp > 0:
        raise ValueError(f"need lambda_s >= 0 and alpha_exp > 0, got {lambda_s}, {alpha_exp}")
    if np.any(y < 0):
        raise ValueError("luminance must be nonnegative")
    if lambda_s == 0 or y.size == 1:
        return y.copy()
    if exact is None:
        exact = y.size <= DENSE_MAX_PIXELS
    target = VectorField(-np.diff(y, axis=1), -np.diff(y, axis=0))
    weights = _wls_weights(y, alpha_exp)
    if exact:
        offset = solve_dense(target, weights, lambda_s)
    else:
        offset = alternating_solve(target, weights, lambda_schedule(lambda_s, WLS_ITERATIONS), threads=threads)
    return y + offset


def _smooth(plane, method, params, threads):
    if method == "gif":
        return guided_filter(plane, plane, int(params["radius"]), float(params["eps"]))
    return wls_smooth(plane, float(params["lambda_s"]), float(params["alpha_exp"]), threads=threads)


def additive_decompose(image, method: str = "gif", params: dict | None = None, per_channel: bool = False, threads: int = 1) -> AdditiveDecomposition:
    """Split an image into smoothed base and signed additive detail.

    Works on Y by default. ``per_channel`` decomposes every colour channel
    instead and returns (H, W, C) layers.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")
    params = {**DEFAULT_PARAMS[method], **(params or {})}
    img = as_image(image)
    if per_channel:
        source = img
        base = np.stack([_smooth(img[:, :, c], method, params, threads) for c in range(img.shape[2])], axis=-1)
    else:
        source = luminance(img)
        base = _smooth(source, method, params, threads)
    return AdditiveDecomposition(base, source - base, method, params)


def additive_merge(image, detail, gain: float = 1.0, base=None) -> np.ndarray:
    """Add ``gain * detail`` to the luminance of ``image`` (chroma unchanged).

    ``base`` replaces the image's own luminance (or its channels, for
    per-channel details) as the layer the detail is added to. Passing the base
    of a decomposition reconstructs the source without a lossy RGB detour.
    """
    img = as_image(image)
    detail = np.asarray(detail, dtype=np.float64)
    if detail.ndim == 3:
        if detail.shape != img.shape:
            raise ValueError(f"detail shape {detail.shape} does not match image {img.shape}")
        target = img if base is None else np.asarray(base, dtype=np.float64)
        return np.clip(target + gain * detail, 0.0, 255.0)
    if detail.shape != img.shape[:2]:
        raise ValueError(f"detail shape {detail.shape} does not match image {img.shape[:2]}")
    target = luminance(img) if base is None else np.asarray(base, dtype=np.float64)
    if target.shape != detail.shape:
        raise ValueError(f"base shape {target.shape} does not match detail {detail.shape}")
    return replace_luminance(img, np.clip(target + gain * detail, 0.0, 255.0))
