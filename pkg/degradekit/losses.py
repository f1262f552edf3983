# losses.py

"""
This module defines the fusion loss suite and the no-reference fusion metrics. Losses compare a
fused image with the high-quality infrared and visible sources; metrics score a fused image on its
own (EN, SD) or by how much source edge information it carries (Qabf).

Classes:
    LossWeights: Nonnegative weights of the intensity, SSIM, gradient and color terms (default 8:1:10:12).
    LossReport: The four component losses and their weighted total.
    FusionLosses: intensity_loss, ssim_loss, gradient_loss, color_loss, total_loss.
    FusionMetrics: entropy_metric, sd_metric, qabf_metric and a combined metrics row.

Usage:
    Images are `Image` objects in [0, 1]. Intensity, gradient and SSIM terms work on BT.601 luminance
    unless `ir_broadcast=True` asks the intensity term to broadcast the infrared plane over the color
    channels instead. The color term needs RGB inputs; `total_loss` treats gray images as R=G=B.

    Qabf uses strength and orientation sigmoids Q = G / (1 + exp(kappa (x - sigma))). The published
    constants are G_g = 0.9994, kappa_g = -15, sigma_g = 0.5 and G_a = 0.9879, kappa_a = -22,
    sigma_a = 0.8. Here the strength ratio and orientation alignment are normalized to [0, 1] and the
    constants are kappa_g = -10, sigma_g = 0.5, kappa_a = -20, sigma_a = 0.75, with each gain G set
    so a perfectly preserved edge scores exactly 1.

Examples:
    >>> report = FusionLosses.total_loss(fused, ir, vi)
    >>> report.total
    0.734
    >>> FusionMetrics.entropy_metric(fused)
    7.12
    >>> FusionMetrics.row(fused, ir, vi)["qabf"]
    0.58
"""

import logging
from dataclasses import astuple, dataclass

import numpy as np
from scipy import signal, stats

from .exceptions import InvalidArgumentError
from .image_utils import ImageUtils

logger = logging.getLogger(__name__)

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2

# Qabf sigmoid constants: strength (kappa_g, sigma_g) and orientation (kappa_a, sigma_a)
QABF_KAPPA_G, QABF_SIGMA_G = -10.0, 0.5
QABF_KAPPA_A, QABF_SIGMA_A = -20.0, 0.75


@dataclass(frozen=True)
class LossWeights:
    """
    Weights of the fusion loss terms.

    Attributes:
        alpha_int (float): Intensity term.
        alpha_ssim (float): Structural term.
        alpha_grad (float): Gradient term.
        alpha_color (float): Color term.
    """

    alpha_int: float = 8.0
    alpha_ssim: float = 1.0
    alpha_grad: float = 10.0
    alpha_color: float = 12.0

    def __post_init__(self):
        if any(w < 0 for w in astuple(self)):
            raise InvalidArgumentError(f"Loss weights must be nonnegative. Got: {astuple(self)}")

    def combine(self, l_int, l_ssim, l_grad, l_color):
        return self.alpha_int * l_int + self.alpha_ssim * l_ssim + self.alpha_grad * l_grad + self.alpha_color * l_color


@dataclass(frozen=True)
class LossReport:
    l_int: float
    l_ssim: float
    l_grad: float
    l_color: float
    total: float

    def to_dict(self):
        return {"l_int": self.l_int, "l_ssim": self.l_ssim, "l_grad": self.l_grad, "l_color": self.l_color, "total": self.total}


def _gaussian_window(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    offsets = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(offsets ** 2) / (2.0 * sigma ** 2))
    window = np.outer(g, g)
    return window / window.sum()


class FusionLosses:
    """Loss terms between a fused image and its two high-quality sources."""

    @classmethod
    def input_check(cls, *images):
        sizes = {(img.height, img.width) for img in images}
        if len(sizes) != 1:
            raise InvalidArgumentError(f"Images must share their dimensions. Got: {sorted(sizes)}")

    @classmethod
    def intensity_loss(cls, fused, ir_hq, vi_hq, ir_broadcast=False):
        """
        Mean absolute difference between the fused image and the pixelwise max of the sources.

        Args:
            fused (Image): Fused image.
            ir_hq (Image): High-quality infrared image.
            vi_hq (Image): High-quality visible image.
            ir_broadcast (bool): Compare per color channel with the infrared plane repeated,
                instead of comparing luminances.

        Returns:
            float: (1 / HW) * sum |F - max(IR, VI)|, averaged over channels when broadcasting.
        """
        cls.input_check(fused, ir_hq, vi_hq)
        if ir_broadcast:
            channels = max(fused.channels, vi_hq.channels, ir_hq.channels)
            f, ir, vi = (np.broadcast_to(img.data, fused.shape[:2] + (channels,)) for img in (fused, ir_hq, vi_hq))
        else:
            f, ir, vi = (ImageUtils.luminance(img).data for img in (fused, ir_hq, vi_hq))
        return float(np.mean(np.abs(f - np.maximum(ir, vi))))

    @classmethod
    def ssim(cls, a, b):
        """
        Mean SSIM of two images over every valid 11 x 11 Gaussian window (sigma 1.5).

        Args:
            a (Image): First image, converted to luminance.
            b (Image): Second image, converted to luminance.

        Returns:
            float: SSIM in [-1, 1].

        Raises:
            InvalidArgumentError: If the images are smaller than the window.
        """
        cls.input_check(a, b)
        if a.height < SSIM_WINDOW or a.width < SSIM_WINDOW:
            raise InvalidArgumentError(f"SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}. Got {a.height}x{a.width}.")
        x = ImageUtils.luminance(a).plane
        y = ImageUtils.luminance(b).plane
        window = _gaussian_window()

        def filt(z):
            return signal.convolve2d(z, window, mode="valid")

        mu_x, mu_y = filt(x), filt(y)
        mu_xx, mu_yy, mu_xy = mu_x * mu_x, mu_y * mu_y, mu_x * mu_y
        var_x = filt(x * x) - mu_xx
        var_y = filt(y * y) - mu_yy
        cov = filt(x * y) - mu_xy
        ssim_map = ((2 * mu_xy + SSIM_C1) * (2 * cov + SSIM_C2)) / ((mu_xx + mu_yy + SSIM_C1) * (var_x + var_y + SSIM_C2))
        return float(np.mean(ssim_map))

    @classmethod
    def ssim_loss(cls, fused, ir_hq, vi_hq):
        """2 - SSIM(F, IR) - SSIM(F, VI), in [0, 4]."""
        cls.input_check(fused, ir_hq, vi_hq)
        return float(max(0.0, 2.0 - cls.ssim(fused, ir_hq) - cls.ssim(fused, vi_hq)))

    @classmethod
    def gradient_loss(cls, fused, ir_hq, vi_hq):
        """Mean absolute difference between the fused Sobel magnitude and the max of the sources'."""
        cls.input_check(fused, ir_hq, vi_hq)
        g_f, g_ir, g_vi = (ImageUtils.sobel(ImageUtils.luminance(img)).data for img in (fused, ir_hq, vi_hq))
        return float(np.mean(np.abs(g_f - np.maximum(g_ir, g_vi))))

    @classmethod
    def color_loss(cls, fused, vi_hq):
        """
        Chroma distance to the visible image.

        Args:
            fused (Image): RGB fused image.
            vi_hq (Image): RGB visible image.

        Returns:
            float: (sum |dCb| + sum |dCr|) / HW.

        Raises:
            InvalidArgumentError: If either image is not RGB or the sizes differ.
        """
        cls.input_check(fused, vi_hq)
        if not (fused.is_rgb and vi_hq.is_rgb):
            raise InvalidArgumentError(
                f"color_loss needs RGB images. Got {fused.channels} and {vi_hq.channels} channels."
            )
        f = ImageUtils.rgb_to_ycbcr(fused).data[:, :, 1:]
        v = ImageUtils.rgb_to_ycbcr(vi_hq).data[:, :, 1:]
        return float(np.sum(np.abs(f - v)) / (fused.height * fused.width))

    @classmethod
    def total_loss(cls, fused, ir_hq, vi_hq, weights=None, ir_broadcast=False):
        """
        Weighted sum of the four loss terms.

        Args:
            fused (Image): Fused image.
            ir_hq (Image): High-quality infrared image.
            vi_hq (Image): High-quality visible image.
            weights (LossWeights): Term weights; 8:1:10:12 by default.
            ir_broadcast (bool): See `intensity_loss`.

        Returns:
            LossReport: Components and total.
        """
        weights = weights or LossWeights()
        l_int = cls.intensity_loss(fused, ir_hq, vi_hq, ir_broadcast=ir_broadcast)
        l_ssim = cls.ssim_loss(fused, ir_hq, vi_hq)
        l_grad = cls.gradient_loss(fused, ir_hq, vi_hq)
        l_color = cls.color_loss(fused.as_rgb(), vi_hq.as_rgb())
        report = LossReport(l_int, l_ssim, l_grad, l_color, weights.combine(l_int, l_ssim, l_grad, l_color))
        logger.debug("Loss report: %s", report)
        return report


class FusionMetrics:
    """No-reference fusion metrics on the 0-255 gray scale."""

    @staticmethod
    def gray255(img):
        return ImageUtils.luminance(img).plane * 255.0

    @classmethod
    def entropy_metric(cls, img):
        """Shannon entropy, in bits, of the 256-bin histogram of round(v * 255)."""
        levels = np.clip(np.round(cls.gray255(img)), 0, 255).astype(np.int64)
        counts = np.bincount(levels.ravel(), minlength=256)
        return float(stats.entropy(counts, base=2))

    @classmethod
    def sd_metric(cls, img):
        """Population standard deviation on the 0-255 scale."""
        return float(np.std(cls.gray255(img)))

    @staticmethod
    def edge_arrays(img):
        """Sobel edge strength and orientation of a gray image."""
        gx, gy = ImageUtils.sobel_components(ImageUtils.luminance(img))
        strength = np.sqrt(gx ** 2 + gy ** 2)
        orientation = np.full_like(gx, np.pi / 2)
        nonzero = gx != 0
        orientation[nonzero] = np.arctan(gy[nonzero] / gx[nonzero])
        return strength, orientation

    @staticmethod
    def edge_preservation(g_src, a_src, g_f, a_f):
        """Per-pixel edge preservation of a source in the fused image, 1 when perfect."""
        ratio = np.ones_like(g_src)
        weaker_f = g_src > g_f
        weaker_src = g_src < g_f
        ratio[weaker_f] = g_f[weaker_f] / g_src[weaker_f]
        ratio[weaker_src] = g_src[weaker_src] / g_f[weaker_src]
        alignment = 1.0 - np.abs(a_src - a_f) / (np.pi / 2)

        gain_g = 1.0 + np.exp(QABF_KAPPA_G * (1.0 - QABF_SIGMA_G))
        gain_a = 1.0 + np.exp(QABF_KAPPA_A * (1.0 - QABF_SIGMA_A))
        q_g = gain_g / (1.0 + np.exp(QABF_KAPPA_G * (ratio - QABF_SIGMA_G)))
        q_a = gain_a / (1.0 + np.exp(QABF_KAPPA_A * (alignment - QABF_SIGMA_A)))
        return q_g * q_a

    @classmethod
    def qabf_metric(cls, fused, ir, vi):
        """
        Edge information transferred from both sources to the fused image.

        Args:
            fused (Image): Fused image.
            ir (Image): Infrared source.
            vi (Image): Visible source.

        Returns:
            float: Edge-strength-weighted mean preservation in [0, 1]; 0 when neither source has edges.
        """
        FusionLosses.input_check(fused, ir, vi)
        g_a, a_a = cls.edge_arrays(ir)
        g_b, a_b = cls.edge_arrays(vi)
        g_f, a_f = cls.edge_arrays(fused)
        q_af = cls.edge_preservation(g_a, a_a, g_f, a_f)
        q_bf = cls.edge_preservation(g_b, a_b, g_f, a_f)
        denominator = np.sum(g_a + g_b)
        if denominator == 0:
            return 0.0
        return float(np.clip(np.sum(q_af * g_a + q_bf * g_b) / denominator, 0.0, 1.0))

    @classmethod
    def row(cls, fused, ir, vi, weights=None, ir_broadcast=False):
        """
        All metrics and losses of one fused pair as a flat dict.

        Returns:
            dict: en, sd, qabf, ssim (mean of SSIM to each source), l_int, l_ssim, l_grad, l_color, total.
        """
        report = FusionLosses.total_loss(fused, ir, vi, weights=weights, ir_broadcast=ir_broadcast)
        ssim = 0.5 * (FusionLosses.ssim(fused, ir) + FusionLosses.ssim(fused, vi))
        return {
            "en": cls.entropy_metric(fused),
            "sd": cls.sd_metric(fused),
            "qabf": cls.qabf_metric(fused, ir, vi),
            "ssim": ssim,
            **report.to_dict(),
        }
