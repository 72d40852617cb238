import numpy as np
import pytest

from speckle_nlos.optics import GridSpec


@pytest.fixture
def grid64():
    return GridSpec(64, 64, 10e-6, 632.8e-9)


@pytest.fixture
def grid256():
    return GridSpec(256, 256, 10e-6, 632.8e-9)


def digit(label=3, n=28, seed=None):
    """Crude synthetic glyph: a few strokes whose placement depends on the label."""
    from speckle_nlos.dataset import LabeledImage

    px = np.zeros((n, n))
    rng = np.random.default_rng(label if seed is None else seed)
    for _ in range(3 + label % 4):
        r, c = rng.integers(4, n - 8, 2)
        if rng.random() < 0.5:
            px[r : r + 2, c : c + 10] = 1.0
        else:
            px[r : r + 10, c : c + 2] = 1.0
    return LabeledImage(px, label)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
