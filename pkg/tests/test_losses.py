# test_losses.py

import numpy as np
import pytest

from degradekit.exceptions import InvalidArgumentError
from degradekit.image_utils import Image, ImageUtils
from degradekit.losses import FusionLosses, FusionMetrics, LossWeights


def loop_ssim(x, y):
    """Reference SSIM computed window by window."""
    offsets = np.arange(11) - 5.0
    g = np.exp(-(offsets ** 2) / (2 * 1.5 ** 2))
    w = np.outer(g, g)
    w /= w.sum()
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    values = []
    for i in range(x.shape[0] - 10):
        for j in range(x.shape[1] - 10):
            px, py = x[i:i + 11, j:j + 11], y[i:i + 11, j:j + 11]
            mx, my = np.sum(w * px), np.sum(w * py)
            vx = np.sum(w * (px - mx) ** 2)
            vy = np.sum(w * (py - my) ** 2)
            cov = np.sum(w * (px - mx) * (py - my))
            values.append(((2 * mx * my + c1) * (2 * cov + c2)) / ((mx ** 2 + my ** 2 + c1) * (vx + vy + c2)))
    return float(np.mean(values))


def test_intensity_loss_zero_cases(gray_scene):
    assert FusionLosses.intensity_loss(gray_scene, gray_scene, gray_scene) == 0.0
    darker = Image(gray_scene.plane * 0.5)
    assert FusionLosses.intensity_loss(gray_scene, darker, gray_scene) == pytest.approx(0.0, abs=1e-15)


def test_intensity_loss_offset(gray_scene):
    fused = Image(gray_scene.plane + 0.1)
    loss = FusionLosses.intensity_loss(fused, gray_scene, gray_scene)
    assert loss == pytest.approx(0.1), f"Expected 0.1, got {loss}"


def test_intensity_loss_oracle(rng):
    f, ir, vi = (Image(rng.random((12, 12))) for _ in range(3))
    expected = np.mean(np.abs(f.plane - np.maximum(ir.plane, vi.plane)))
    assert FusionLosses.intensity_loss(f, ir, vi) == pytest.approx(expected)


def test_intensity_loss_ir_broadcast(gray_scene, rgb_scene):
    luminance = FusionLosses.intensity_loss(rgb_scene, gray_scene, rgb_scene)
    broadcast = FusionLosses.intensity_loss(rgb_scene, gray_scene, rgb_scene, ir_broadcast=True)
    expected = np.mean(np.abs(rgb_scene.data - np.maximum(gray_scene.data, rgb_scene.data)))
    assert broadcast == pytest.approx(expected)
    assert luminance >= 0.0


def test_ssim_loss_zero_for_identical(rgb_scene):
    assert FusionLosses.ssim_loss(rgb_scene, rgb_scene, rgb_scene) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_ssim_loss_matches_loop_oracle(seed):
    rng = np.random.default_rng(seed)
    f, ir, vi = (rng.random((16, 16)) for _ in range(3))
    value = FusionLosses.ssim_loss(Image(f), Image(ir), Image(vi))
    expected = 2.0 - loop_ssim(f, ir) - loop_ssim(f, vi)
    assert abs(value - expected) < 1e-6, f"Expected {expected}, got {value}"


def test_ssim_loss_range(rng):
    for _ in range(5):
        f, ir, vi = (Image(rng.random((16, 16))) for _ in range(3))
        assert 0.0 <= FusionLosses.ssim_loss(f, ir, vi) <= 4.0


def test_ssim_needs_full_window():
    small = Image.constant(10, 12, 0.5)
    with pytest.raises(InvalidArgumentError):
        FusionLosses.ssim(small, small)


def test_gradient_loss(gray_scene, rng):
    assert FusionLosses.gradient_loss(gray_scene, gray_scene, gray_scene) == 0.0
    flat = Image.constant(32, 32, 0.5)
    assert FusionLosses.gradient_loss(gray_scene, flat, gray_scene) == 0.0
    f, ir, vi = (Image(rng.random((12, 12))) for _ in range(3))
    g = [ImageUtils.sobel(img).plane for img in (f, ir, vi)]
    expected = np.mean(np.abs(g[0] - np.maximum(g[1], g[2])))
    assert FusionLosses.gradient_loss(f, ir, vi) == pytest.approx(expected)


def test_color_loss(rgb_scene, gray_scene):
    assert FusionLosses.color_loss(rgb_scene, rgb_scene) == 0.0
    brighter = Image(rgb_scene.data + 0.05)
    assert FusionLosses.color_loss(brighter, rgb_scene) == pytest.approx(0.0, abs=1e-12)
    swapped = Image(rgb_scene.data[:, :, ::-1])
    assert FusionLosses.color_loss(swapped, rgb_scene) > 0.0
    with pytest.raises(InvalidArgumentError):
        FusionLosses.color_loss(gray_scene, rgb_scene)


def test_size_mismatch(gray_scene):
    with pytest.raises(InvalidArgumentError):
        FusionLosses.intensity_loss(gray_scene, Image.constant(16, 16, 0.5), gray_scene)


def test_total_loss_weights(rgb_scene):
    assert LossWeights().combine(0.1, 0.2, 0.0, 0.0) == pytest.approx(1.0)
    report = FusionLosses.total_loss(rgb_scene, rgb_scene, rgb_scene)
    assert report.total == pytest.approx(0.0, abs=1e-10)
    zero = LossWeights(0.0, 0.0, 0.0, 0.0)
    fused = Image(rgb_scene.data[:, :, ::-1])
    assert FusionLosses.total_loss(fused, rgb_scene, rgb_scene, weights=zero).total == 0.0
    with pytest.raises(InvalidArgumentError):
        LossWeights(alpha_int=-1.0)


def test_total_loss_accepts_gray(gray_scene, rgb_scene):
    report = FusionLosses.total_loss(gray_scene, gray_scene, rgb_scene)
    assert report.l_color > 0.0
    expected = LossWeights().combine(report.l_int, report.l_ssim, report.l_grad, report.l_color)
    assert report.total == pytest.approx(expected)


def test_entropy_metric():
    ramp = Image((np.arange(256, dtype=float) / 255).reshape(16, 16))
    assert FusionMetrics.entropy_metric(ramp) == pytest.approx(8.0)
    halves = Image(np.repeat([[0.0], [1.0]], 8, axis=0) * np.ones((16, 16)))
    assert FusionMetrics.entropy_metric(halves) == pytest.approx(1.0)
    assert FusionMetrics.entropy_metric(Image.constant(8, 8, 0.3)) == 0.0


def test_sd_metric():
    halves = Image(np.repeat([[0.0], [1.0]], 8, axis=0) * np.ones((16, 16)))
    assert FusionMetrics.sd_metric(halves) == pytest.approx(127.5)
    assert FusionMetrics.sd_metric(Image.constant(8, 8, 0.3)) == pytest.approx(0.0, abs=1e-12)


def test_qabf_identical_sources(gray_scene):
    value = FusionMetrics.qabf_metric(gray_scene, gray_scene, gray_scene)
    assert value >= 0.99, f"Expected near 1, got {value}"


def test_qabf_constant_fused(gray_scene, rgb_scene):
    value = FusionMetrics.qabf_metric(Image.constant(32, 32, 0.5), gray_scene, rgb_scene)
    assert value < 0.01, f"Expected near 0, got {value}"


def test_edge_preservation_gains(rng):
    strength = rng.uniform(0.1, 2.0, size=(8, 8))
    orientation = rng.uniform(-np.pi / 2, np.pi / 2, size=(8, 8))
    perfect = FusionMetrics.edge_preservation(strength, orientation, strength, orientation)
    assert np.allclose(perfect, 1.0, rtol=0, atol=1e-12), "Perfect preservation must score 1"
    halved = FusionMetrics.edge_preservation(strength, orientation, strength / 2, orientation)
    assert np.all(halved < 1.0) and np.all(halved > 0.0)


@pytest.mark.parametrize("seed", range(100))
def test_qabf_range(seed):
    rng = np.random.default_rng(seed)
    f, ir, vi = (Image(rng.random((16, 16))) for _ in range(3))
    value = FusionMetrics.qabf_metric(f, ir, vi)
    assert 0.0 <= value <= 1.0, f"Expected a value in [0, 1], got {value}"


def test_qabf_flat_sources(rng):
    flat = Image.constant(16, 16, 0.2)
    assert FusionMetrics.qabf_metric(Image(rng.random((16, 16))), flat, flat) == 0.0


def test_metrics_row(gray_scene, rgb_scene):
    row = FusionMetrics.row(rgb_scene, gray_scene, rgb_scene)
    assert set(row) == {"en", "sd", "qabf", "ssim", "l_int", "l_ssim", "l_grad", "l_color", "total"}
    assert row["l_color"] == 0.0
