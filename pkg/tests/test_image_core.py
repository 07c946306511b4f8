import struct

import cv2
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from detailprior.image_core import (
    CorruptImageError,
    UnreadableImageError,
    UnsupportedFormatError,
    bicubic_resize,
    load_image,
    mod_crop,
    read_dpln,
    resize_weights,
    rgb_to_ycbcr,
    save_image,
    write_dpln,
    ycbcr_to_rgb,
)

u8_images = arrays(
    np.uint8,
    st.tuples(st.integers(1, 12), st.integers(1, 12), st.sampled_from([1, 3])),
)


def _naive_resize_sample(plane, oy, ox, out_h, out_w, a=-0.5):
    """Evaluate one output sample straight from the widened cubic kernel."""

    def cubic(t):
        t = abs(t)
        if t <= 1:
            return (a + 2) * t**3 - (a + 3) * t**2 + 1
        if t < 2:
            return a * t**3 - 5 * a * t**2 + 8 * a * t - 4 * a
        return 0.0

    def axis(in_n, out_n, o):
        s = out_n / in_n
        k = min(s, 1.0)
        centre = (o + 0.5) / s - 0.5  # 0-based source coordinate
        lo = int(np.floor(centre - 2 / k)) - 1
        taps = []
        for j in range(lo, lo + int(np.ceil(4 / k)) + 3):
            taps.append((min(max(j, 0), in_n - 1), k * cubic(k * (centre - j))))
        total = sum(w for _, w in taps)
        return [(j, w / total) for j, w in taps]

    h, w = plane.shape
    return sum(
        wy * wx * plane[jy, jx]
        for jy, wy in axis(h, out_h, oy)
        for jx, wx in axis(w, out_w, ox)
    )


def test_load_white_png(tmp_path):
    path = tmp_path / "white.png"
    cv2.imwrite(str(path), np.full((2, 2, 3), 255, np.uint8))
    img = load_image(path)
    assert img.shape == (2, 2, 3)
    assert np.all(img == 255.0)


def test_load_black_pgm(tmp_path):
    path = tmp_path / "black.pgm"
    path.write_bytes(b"P5\n1 1\n255\n\x00")
    img = load_image(path)
    assert img.shape == (1, 1, 1)
    assert img[0, 0, 0] == 0.0


def test_load_ppm_channel_order(tmp_path):
    path = tmp_path / "red.ppm"
    path.write_bytes(b"P6\n1 1\n255\n\xff\x00\x10")
    assert load_image(path)[0, 0].tolist() == [255.0, 0.0, 16.0]


def test_load_16bit_png_scaled(tmp_path):
    path = tmp_path / "deep.png"
    data = np.array([[0, 65535], [32768, 257]], np.uint16)
    cv2.imwrite(str(path), data)
    img = load_image(path)
    assert img.shape == (2, 2, 1)
    np.testing.assert_allclose(img[:, :, 0], data * 255.0 / 65535.0)


def test_load_errors_are_distinct(tmp_path):
    good = tmp_path / "good.png"
    save_image(np.full((8, 8, 3), 100.0), good)
    truncated = tmp_path / "trunc.png"
    truncated.write_bytes(good.read_bytes()[:40])
    with pytest.raises(CorruptImageError) as info:
        load_image(truncated)
    assert str(truncated) in str(info.value)

    jpeg = tmp_path / "x.jpg"
    jpeg.write_bytes(b"\xff\xd8\xff\xe0" + b"\x00" * 20)
    with pytest.raises(UnsupportedFormatError):
        load_image(jpeg)

    with pytest.raises(UnreadableImageError) as info:
        load_image(tmp_path / "missing.png")
    assert "missing.png" in info.value.path


def test_rgba_rejected(tmp_path):
    path = tmp_path / "alpha.png"
    cv2.imwrite(str(path), np.zeros((2, 2, 4), np.uint8))
    with pytest.raises(UnsupportedFormatError):
        load_image(path)


@settings(deadline=None, max_examples=30)
@given(u8_images)
def test_save_load_roundtrip(tmp_path_factory, data):
    path = tmp_path_factory.mktemp("rt") / "img.png"
    save_image(data.astype(float), path)
    back = load_image(path)
    assert back.shape == data.shape
    assert np.array_equal(back, data.astype(float))


@pytest.mark.parametrize("value, stored", [(255.7, 255), (127.5, 128), (127.49, 127), (-3.0, 0), (0.5, 1)])
def test_save_rounding_and_clamp(tmp_path, value, stored):
    path = tmp_path / "v.png"
    save_image(np.full((1, 1, 1), value), path)
    assert load_image(path)[0, 0, 0] == stored


def test_save_leaves_no_temp_files(tmp_path):
    save_image(np.zeros((3, 3, 3)), tmp_path / "a.png")
    assert [p.name for p in tmp_path.iterdir()] == ["a.png"]


def test_ycbcr_reference_points():
    y, cb, cr = rgb_to_ycbcr(np.full((1, 1, 3), 255.0))
    assert y[0, 0] == pytest.approx(235.0, abs=1e-9)
    assert cb[0, 0] == pytest.approx(128.0, abs=1e-9)
    y, cb, cr = rgb_to_ycbcr(np.zeros((1, 1, 3)))
    assert (y[0, 0], cb[0, 0], cr[0, 0]) == pytest.approx((16.0, 128.0, 128.0), abs=1e-9)


@given(st.floats(0, 255))
def test_gray_has_zero_chroma(c):
    _, cb, cr = rgb_to_ycbcr(np.full((1, 1, 3), c))
    assert cb[0, 0] == pytest.approx(128.0, abs=1e-9)
    assert cr[0, 0] == pytest.approx(128.0, abs=1e-9)


def test_ycbcr_inverse_reference_points():
    one = np.ones((1, 1))
    assert ycbcr_to_rgb(235 * one, 128 * one, 128 * one)[0, 0] == pytest.approx([255, 255, 255], abs=0.5)
    assert ycbcr_to_rgb(16 * one, 128 * one, 128 * one)[0, 0] == pytest.approx([0, 0, 0], abs=0.5)


@settings(deadline=None)
@given(arrays(np.float64, (5, 4, 3), elements=st.floats(0, 255)))
def test_ycbcr_roundtrip(img):
    back = ycbcr_to_rgb(*rgb_to_ycbcr(img))
    assert np.max(np.abs(np.floor(back + 0.5) - np.floor(img + 0.5))) <= 1
    assert np.max(np.abs(back - img)) <= 1e-9


def test_ycbcr_errors():
    with pytest.raises(ValueError):
        rgb_to_ycbcr(np.zeros((2, 2, 1)))
    with pytest.raises(ValueError):
        ycbcr_to_rgb(np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)))


@settings(deadline=None)
@given(
    st.floats(0, 255),
    st.integers(1, 20),
    st.integers(1, 20),
    st.integers(1, 40),
    st.integers(1, 40),
)
def test_resize_constant_and_shape(c, h, w, oh, ow):
    out = bicubic_resize(np.full((h, w), c), ow, oh)
    assert out.shape == (oh, ow)
    np.testing.assert_allclose(out, c, atol=1e-9)


def test_resize_weight_rows_sum_to_one():
    for n_in, n_out in [(10, 3), (3, 10), (7, 7), (128, 32)]:
        np.testing.assert_allclose(resize_weights(n_in, n_out).sum(axis=1), 1.0, atol=1e-12)


def test_upscale_reproduces_linear_ramp():
    ramp = np.tile(np.arange(16, dtype=float) * 3.0 + 5.0, (6, 1))
    out = bicubic_resize(ramp, 32, 12)
    # output pixel centre x maps to source coordinate (x + 0.5)/2 - 0.5
    src = (np.arange(32) + 0.5) / 2 - 0.5
    expected = src * 3.0 + 5.0
    # interior only: edge replication bends the line within two taps of a border
    np.testing.assert_allclose(out[:, 4:-4], np.tile(expected[4:-4], (12, 1)), atol=1e-9)


def test_checkerboard_downscale():
    board = np.array([[0.0, 255.0], [255.0, 0.0]])
    expected = _naive_resize_sample(board, 0, 0, 1, 1)
    assert expected == pytest.approx(127.5, abs=0.5)
    assert bicubic_resize(board, 1, 1)[0, 0] == pytest.approx(expected, abs=1e-9)


def test_resize_matches_naive_kernel(rng):
    plane = rng.uniform(0, 255, (13, 9))
    for oh, ow in [(4, 3), (26, 18), (13, 5)]:
        out = bicubic_resize(plane, ow, oh)
        for oy in range(oh):
            for ox in range(ow):
                assert out[oy, ox] == pytest.approx(_naive_resize_sample(plane, oy, ox, oh, ow), abs=1e-9)


@pytest.mark.parametrize("size", [(96, 128), (12, 16), (24, 32)])
def test_resize_interior_matches_pillow(rng, size):
    plane = rng.uniform(0, 255, (64, 48)).astype(np.float32)
    ref = np.asarray(Image.fromarray(plane, mode="F").resize(size, Image.BICUBIC), dtype=np.float64)
    ours = bicubic_resize(plane.astype(np.float64), *size)
    # Pillow renormalises at borders instead of replicating edges
    np.testing.assert_allclose(ours[4:-4, 4:-4], ref[4:-4, 4:-4], atol=1e-3)


def test_resize_zero_size():
    with pytest.raises(ValueError):
        bicubic_resize(np.zeros((4, 4)), 0, 2)


@pytest.mark.parametrize("shape, factor, expected", [((7, 9), 4, (4, 8)), ((8, 8), 4, (8, 8)), ((5, 5), 1, (5, 5))])
def test_mod_crop(shape, factor, expected):
    img = np.arange(shape[0] * shape[1], dtype=float).reshape(shape)
    out = mod_crop(img, factor)
    assert out.shape[:2] == expected
    assert np.array_equal(out[:, :, 0], img[: expected[0], : expected[1]])


def test_mod_crop_too_small():
    with pytest.raises(ValueError):
        mod_crop(np.zeros((3, 3)), 4)


def test_dpln_layout(tmp_path):
    plane = np.array([[1.0, -2.5, 3.0], [0.25, 1e-3, 7.0]])
    path = tmp_path / "p.dpln"
    write_dpln(plane, path)
    raw = path.read_bytes()
    assert raw[:4] == b"DPLN"
    assert struct.unpack("<III", raw[4:16]) == (1, 2, 3)
    assert len(raw) == 16 + 6 * 4
    np.testing.assert_array_equal(read_dpln(path), plane.astype(np.float32))


def test_dpln_rejects_garbage(tmp_path):
    path = tmp_path / "bad.dpln"
    path.write_bytes(b"DPLN" + struct.pack("<III", 1, 4, 4) + b"\x00" * 8)
    with pytest.raises(CorruptImageError):
        read_dpln(path)
    path.write_bytes(b"NOPE" + b"\x00" * 12)
    with pytest.raises(UnsupportedFormatError):
        read_dpln(path)
