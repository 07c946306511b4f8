"""Raster I/O, colour conversion and resampling.

Images are float64 arrays of shape (H, W, C) with C in {1, 3} and samples in
[0, 255]. Planes are 2-D float64 arrays of shape (H, W).
"""

from __future__ import annotations

import contextlib
import os
import struct
import tempfile
from pathlib import Path

import cv2
import numpy as np

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
PNM_MAGICS = (b"P5", b"P6")
DPLN_MAGIC = b"DPLN"
DPLN_VERSION = 1

# BT.601 studio swing, inputs in [0, 255]
_YCBCR_MATRIX = np.array(
    [
        [65.481, 128.553, 24.966],
        [-37.797, -74.203, 112.0],
        [112.0, -93.786, -18.214],
    ]
) / 255.0
_YCBCR_OFFSET = np.array([16.0, 128.0, 128.0])
_YCBCR_INVERSE = np.linalg.inv(_YCBCR_MATRIX)


class ImageError(Exception):
    """Base class for image I/O failures. Carries the offending path."""

    def __init__(self, path, message):
        self.path = str(path)
        super().__init__(f"{self.path}: {message}")


class UnreadableImageError(ImageError):
    pass


class UnsupportedFormatError(ImageError):
    pass


class CorruptImageError(ImageError):
    pass


class ImageWriteError(ImageError):
    pass


@contextlib.contextmanager
def atomic_output(path):
    """Yield a temporary path next to ``path``; rename it into place on success."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def as_image(samples) -> np.ndarray:
    """Coerce an array to (H, W, C) float64 layout."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ValueError(f"expected (H, W), (H, W, 1) or (H, W, 3), got {arr.shape}")
    return arr


def load_image(path) -> np.ndarray:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise UnreadableImageError(path, exc.strerror or str(exc)) from exc

    if data.startswith(PNG_MAGIC):
        pass
    elif data[:2] in PNM_MAGICS:
        pass
    else:
        raise UnsupportedFormatError(path, "not a PNG or binary PPM/PGM file")

    decoded = cv2.imdecode(np.frombuffer(data, np.uint8), cv2.IMREAD_UNCHANGED)
    if decoded is None:
        raise CorruptImageError(path, "could not decode image data")

    if decoded.dtype == np.uint8:
        scale = 1.0
    elif decoded.dtype == np.uint16:
        scale = 255.0 / 65535.0
    else:
        raise UnsupportedFormatError(path, f"unsupported sample type {decoded.dtype}")

    if decoded.ndim == 2:
        img = decoded[:, :, None]
    elif decoded.shape[2] == 3:
        img = decoded[:, :, ::-1]
    else:
        raise UnsupportedFormatError(path, f"{decoded.shape[2]}-channel images are not supported")
    return np.ascontiguousarray(img, dtype=np.float64) * scale


def quantize(image) -> np.ndarray:
    """Clamp to [0, 255] and round half away from zero, as ``save_image`` stores samples."""
    return np.floor(np.clip(image, 0.0, 255.0) + 0.5)


def save_image(image, path) -> None:
    img = as_image(image)
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite samples")
    q = quantize(img).astype(np.uint8)
    if q.shape[2] == 3:
        q = q[:, :, ::-1]
    else:
        q = q[:, :, 0]
    ok, buf = cv2.imencode(".png", q)
    if not ok:
        raise ImageWriteError(path, "PNG encoding failed")
    try:
        with atomic_output(path) as tmp:
            tmp.write_bytes(buf.tobytes())
    except OSError as exc:
        raise ImageWriteError(path, exc.strerror or str(exc)) from exc


def rgb_to_ycbcr(image):
    img = as_image(image)
    if img.shape[2] != 3:
        raise ValueError(f"expected 3 channels, got {img.shape[2]}")
    ycc = img @ _YCBCR_MATRIX.T + _YCBCR_OFFSET
    return ycc[:, :, 0].copy(), ycc[:, :, 1].copy(), ycc[:, :, 2].copy()


def ycbcr_to_rgb(y, cb, cr) -> np.ndarray:
    y, cb, cr = (np.asarray(p, dtype=np.float64) for p in (y, cb, cr))
    if not (y.shape == cb.shape == cr.shape) or y.ndim != 2:
        raise ValueError(f"plane shapes differ: {y.shape}, {cb.shape}, {cr.shape}")
    ycc = np.stack([y, cb, cr], axis=-1) - _YCBCR_OFFSET
    return np.clip(ycc @ _YCBCR_INVERSE.T, 0.0, 255.0)


def luminance(image) -> np.ndarray:
    """Y plane of an image; grayscale images are their own luminance."""
    img = as_image(image)
    if img.shape[2] == 1:
        return img[:, :, 0].copy()
    return rgb_to_ycbcr(img)[0]


def replace_luminance(image, y) -> np.ndarray:
    """Swap the Y plane of ``image`` for ``y``, keeping chroma unchanged."""
    img = as_image(image)
    if img.shape[2] == 1:
        return np.clip(y, 0.0, 255.0)[:, :, None]
    _, cb, cr = rgb_to_ycbcr(img)
    return ycbcr_to_rgb(y, cb, cr)


def _cubic(x, a=-0.5):
    ax = np.abs(x)
    ax2 = ax * ax
    ax3 = ax2 * ax
    return np.where(
        ax <= 1,
        (a + 2) * ax3 - (a + 3) * ax2 + 1,
        np.where(ax < 2, a * ax3 - 5 * a * ax2 + 8 * a * ax - 4 * a, 0.0),
    )


def resize_weights(in_size: int, out_size: int) -> np.ndarray:
    """Dense (out_size, in_size) bicubic interpolation matrix along one axis.

    Pixel centres are aligned; on downscale the kernel is stretched by the
    inverse scale. Taps falling outside the input are folded onto the edge
    sample.
    """
    scale = out_size / in_size
    if scale < 1:
        width = 4.0 / scale

        def kernel(x):
            return scale * _cubic(scale * x)
    else:
        width = 4.0
        kernel = _cubic

    x = np.arange(1, out_size + 1, dtype=np.float64)
    u = x / scale + 0.5 * (1 - 1 / scale)
    left = np.floor(u - width / 2)
    taps = int(np.ceil(width)) + 2
    idx = left[:, None] + np.arange(taps)[None, :]
    w = kernel(u[:, None] - idx)
    w /= w.sum(axis=1, keepdims=True)
    idx = np.clip(idx, 1, in_size).astype(np.intp) - 1

    mat = np.zeros((out_size, in_size))
    rows = np.repeat(np.arange(out_size), taps)
    np.add.at(mat, (rows, idx.ravel()), w.ravel())
    return mat


def bicubic_resize(plane, out_width: int, out_height: int) -> np.ndarray:
    plane = np.asarray(plane, dtype=np.float64)
    if out_width < 1 or out_height < 1:
        raise ValueError(f"output size must be at least 1x1, got {out_width}x{out_height}")
    h, w = plane.shape
    rows = resize_weights(h, out_height)
    cols = resize_weights(w, out_width)
    return rows @ plane @ cols.T


def resize_image(image, out_width: int, out_height: int) -> np.ndarray:
    img = as_image(image)
    out = [bicubic_resize(img[:, :, c], out_width, out_height) for c in range(img.shape[2])]
    return np.clip(np.stack(out, axis=-1), 0.0, 255.0)


def mod_crop(image, factor: int) -> np.ndarray:
    img = as_image(image)
    if factor < 1:
        raise ValueError(f"factor must be >= 1, got {factor}")
    h, w = img.shape[:2]
    if h < factor or w < factor:
        raise ValueError(f"{w}x{h} image is smaller than crop factor {factor}")
    return img[: h - h % factor, : w - w % factor].copy()


def write_dpln(plane, path) -> None:
    """Write a plane as DPLN: magic, u32 version, u32 height, u32 width, f32 samples (all LE)."""
    plane = np.asarray(plane)
    if plane.ndim != 2:
        raise ValueError(f"expected a 2-D plane, got shape {plane.shape}")
    h, w = plane.shape
    header = DPLN_MAGIC + struct.pack("<III", DPLN_VERSION, h, w)
    body = np.ascontiguousarray(plane, dtype="<f4").tobytes()
    try:
        with atomic_output(path) as tmp:
            tmp.write_bytes(header + body)
    except OSError as exc:
        raise ImageWriteError(path, exc.strerror or str(exc)) from exc


def read_dpln(path) -> np.ndarray:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise UnreadableImageError(path, exc.strerror or str(exc)) from exc
    if data[:4] != DPLN_MAGIC:
        raise UnsupportedFormatError(path, "missing DPLN magic")
    if len(data) < 16:
        raise CorruptImageError(path, "truncated DPLN header")
    version, h, w = struct.unpack("<III", data[4:16])
    if version != DPLN_VERSION:
        raise UnsupportedFormatError(path, f"DPLN version {version} not supported")
    if len(data) != 16 + 4 * h * w:
        raise CorruptImageError(path, f"expected {h}x{w} samples, file size is {len(data)}")
    return np.frombuffer(data, dtype="<f4", offset=16).reshape(h, w).astype(np.float64)
