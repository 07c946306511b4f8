import numpy as np
import pytest

from detailprior.image_core import save_image

ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {name}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def textured_rgb(rng):
    """Smooth gradients plus texture, so details are nontrivial."""
    yy, xx = np.mgrid[0:48, 0:40]
    base = 120 + 60 * np.sin(xx / 5.0) * np.cos(yy / 7.0)
    img = np.stack([base, 0.8 * base + 20, 0.6 * base + 40], axis=-1)
    img += rng.normal(0, 6, img.shape)
    return np.floor(np.clip(img, 0, 255) + 0.5)


@pytest.fixture
def png_path(tmp_path, textured_rgb):
    path = tmp_path / "textured.png"
    save_image(textured_rgb, path)
    return path
