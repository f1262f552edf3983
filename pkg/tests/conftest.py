# conftest.py

import os

import numpy as np
import pytest

from degradekit.dataset import SynthConfig
from degradekit.image_utils import Image, ImageUtils
from degradekit.prompt_bank import PromptBank


def smooth_scene(h, w, channels, seed):
    """Random low-frequency scene in [0.1, 0.9]."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:h, 0:w] / max(h, w)
    planes = []
    for _ in range(channels):
        fy, fx, phase = rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0), rng.uniform(0, 2 * np.pi)
        planes.append(0.5 + 0.4 * np.sin(2 * np.pi * (fy * y + fx * x) + phase))
    return Image(np.stack(planes, axis=2))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def gray_scene():
    return smooth_scene(32, 32, 1, seed=1)


@pytest.fixture
def rgb_scene():
    return smooth_scene(32, 32, 3, seed=2)


@pytest.fixture
def scene_corpus():
    """Ten RGB scenes for monotonicity checks."""
    return [smooth_scene(32, 32, 3, seed=100 + i) for i in range(10)]


@pytest.fixture
def bank():
    return PromptBank.default()


@pytest.fixture
def pair_dir(tmp_path):
    """Five registered 16x16 pairs under clean/ir and clean/vi."""
    root = tmp_path / "clean"
    for i in range(5):
        ir = smooth_scene(16, 16, 1, seed=10 + i)
        vi = smooth_scene(16, 16, 3, seed=20 + i)
        ImageUtils.write_png(ir, os.path.join(root, "ir", f"pair{i:02d}.png"))
        ImageUtils.write_png(vi, os.path.join(root, "vi", f"pair{i:02d}.png"))
    return root


@pytest.fixture
def synth_config(tmp_path, pair_dir):
    return SynthConfig(output_dir=str(tmp_path / "out"), input_dir=str(pair_dir), threads=2)
