# image_utils.py

"""
This module defines the raster types and the `ImageUtils` class, the numeric substrate every other
module of `degradekit` builds on. Images are H x W x C float arrays with values nominally in [0, 1];
parameters quoted on the 0-255 scale (noise sigma, stripe epsilon) are divided by `scale` at the
boundary.

Classes:
    Image: Immutable H x W x C raster, gray (C=1) or RGB (C=3).
    BlurKernel: Normalized 2-D convolution kernel with angle and length metadata.
    Spectrum: Forward-unnormalized 2-D DFT of a gray image.
    ImageUtils: Static helpers for color conversion, convolution, gradients, DFT, noise and PNG I/O.

Methods:
    rgb_to_ycbcr(img): BT.601 full-range RGB -> YCbCr.
    ycbcr_to_rgb(img): Inverse of rgb_to_ycbcr.
    luminance(img): BT.601 luma as a gray image (gray input passes through).
    convolve2d(img, kernel): Same-size convolution with replicate-edge padding.
    sobel(img): L1 Sobel gradient magnitude |Gx| + |Gy| of a gray image.
    sobel_components(img): The signed Sobel responses (Gx, Gy).
    dft2(img): Exact 2-D DFT, DC at index (0, 0).
    idft2(spectrum): Inverse DFT carrying the 1/(HW) factor.
    gaussian_field(h, w, sigma, seed): Seeded i.i.d. N(0, (sigma/scale)^2) field.
    read_png(path): Load an 8-bit gray or RGB PNG into [0, 1].
    write_png(img, path): Quantize with round(v * 255), clamped, and save.

Usage:
    All operations are pure functions of immutable inputs and can be called from several threads.

Examples:
    >>> img = ImageUtils.read_png("scene_vi.png")
    >>> ycbcr = ImageUtils.rgb_to_ycbcr(img)
    >>> edges = ImageUtils.sobel(ImageUtils.luminance(img))
    >>> spectrum = ImageUtils.dft2(ImageUtils.luminance(img))
"""

import logging
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image as PILImage
from scipy import ndimage

from .exceptions import ImageIOError, InvalidArgumentError

logger = logging.getLogger(__name__)

# BT.601 full-range constants
KR, KG, KB = 0.299, 0.587, 0.114
CB_SCALE = 0.564
CR_SCALE = 0.713

INTENSITY_SCALE = 255.0


@dataclass(frozen=True, eq=False)
class Image:
    """
    Immutable raster of shape (height, width, channels).

    Args:
        data (array-like): 2-D (gray) or 3-D array with 1 or 3 channels.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise InvalidArgumentError(f"Image must be HxW, HxWx1 or HxWx3. Got shape: {np.shape(self.data)}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidArgumentError(f"Image must be at least 1x1. Got shape: {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def constant(cls, height, width, value, channels=1):
        return cls(np.full((height, width, channels), float(value)))

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def channels(self):
        return self.data.shape[2]

    @property
    def shape(self):
        return self.data.shape

    @property
    def is_gray(self):
        return self.channels == 1

    @property
    def is_rgb(self):
        return self.channels == 3

    @property
    def plane(self):
        """The single channel of a gray image as a 2-D array."""
        if not self.is_gray:
            raise InvalidArgumentError(f"Expected a single-channel image. Got {self.channels} channels.")
        return self.data[:, :, 0]

    def clamp(self):
        return Image(np.clip(self.data, 0.0, 1.0))

    def as_rgb(self):
        """Return the image with three channels, replicating a gray plane."""
        if self.is_rgb:
            return self
        return Image(np.repeat(self.data, 3, axis=2))


@dataclass(frozen=True, eq=False)
class BlurKernel:
    """
    Normalized, nonnegative square convolution kernel.

    Args:
        weights (array-like): N x N weights summing to 1.
        angle (float): Orientation of the blur in degrees.
        length (float): Length of the blur segment in pixels.
    """

    weights: np.ndarray
    angle: float = 0.0
    length: float = 1.0

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, copy=True)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise InvalidArgumentError(f"Kernel must be square. Got shape: {w.shape}")
        if np.any(w < 0):
            raise InvalidArgumentError("Kernel weights must be nonnegative.")
        if abs(w.sum() - 1.0) > 1e-9:
            raise InvalidArgumentError(f"Kernel weights must sum to 1. Got: {w.sum()!r}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def identity(cls):
        return cls(np.ones((1, 1)), angle=0.0, length=1.0)

    @property
    def size(self):
        return self.weights.shape[0]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    Complex 2-D DFT coefficients, forward-unnormalized, DC at (0, 0).

    Args:
        coefficients (np.ndarray): H x W complex array.
    """

    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=np.complex128, copy=True)
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def height(self):
        return self.coefficients.shape[0]

    @property
    def width(self):
        return self.coefficients.shape[1]

    def energy(self):
        return np.abs(self.coefficients) ** 2

    def log_magnitude(self):
        """log(1 + |X|), DC still at (0, 0)."""
        return np.log1p(np.abs(self.coefficients))

    def centered(self):
        """Log-magnitude with DC moved to (H // 2, W // 2) for display."""
        return np.fft.fftshift(self.log_magnitude())

    def radius_grid(self):
        """Normalized frequency radius of every bin, in [0, 0.5 * sqrt(2)]."""
        fy = np.fft.fftfreq(self.height)
        fx = np.fft.fftfreq(self.width)
        return np.sqrt(fy[:, np.newaxis] ** 2 + fx[np.newaxis, :] ** 2)


class ImageUtils:
    """Static image-processing helpers shared across the package."""

    @staticmethod
    def rgb_to_ycbcr(img):
        """
        Convert an RGB image to full-range BT.601 YCbCr.

        Args:
            img (Image): RGB image in [0, 1].

        Returns:
            Image: Three channels (Y, Cb, Cr); gray colors map to Cb = Cr = 0.5.
        """
        if not img.is_rgb:
            raise InvalidArgumentError(f"rgb_to_ycbcr expects 3 channels. Got {img.channels}.")
        r, g, b = img.data[:, :, 0], img.data[:, :, 1], img.data[:, :, 2]
        y = KR * r + KG * g + KB * b
        cb = 0.5 + (b - y) * CB_SCALE
        cr = 0.5 + (r - y) * CR_SCALE
        return Image(np.stack([y, cb, cr], axis=2))

    @staticmethod
    def ycbcr_to_rgb(img):
        """Inverse of `rgb_to_ycbcr`."""
        if not img.is_rgb:
            raise InvalidArgumentError(f"ycbcr_to_rgb expects 3 channels. Got {img.channels}.")
        y, cb, cr = img.data[:, :, 0], img.data[:, :, 1], img.data[:, :, 2]
        r = y + (cr - 0.5) / CR_SCALE
        b = y + (cb - 0.5) / CB_SCALE
        g = (y - KR * r - KB * b) / KG
        return Image(np.stack([r, g, b], axis=2))

    @staticmethod
    def luminance(img):
        if img.is_gray:
            return img
        return Image(KR * img.data[:, :, 0] + KG * img.data[:, :, 1] + KB * img.data[:, :, 2])

    @staticmethod
    def convolve2d(img, kernel):
        """
        Convolve every channel with a kernel, replicate-edge boundary, same-size output.

        Args:
            img (Image): Input raster.
            kernel (BlurKernel): Kernel with odd dimensions.

        Returns:
            Image: The filtered raster (not clamped).

        Raises:
            InvalidArgumentError: If a kernel dimension is even.
        """
        weights = kernel.weights
        if weights.shape[0] % 2 == 0 or weights.shape[1] % 2 == 0:
            raise InvalidArgumentError(f"Kernel dimensions must be odd. Got shape: {weights.shape}")
        if weights.shape == (1, 1):
            return Image(img.data * weights[0, 0])
        planes = [
            ndimage.convolve(img.data[:, :, c], weights, mode="nearest")
            for c in range(img.channels)
        ]
        return Image(np.stack(planes, axis=2))

    @staticmethod
    def sobel_components(img):
        """Return the Sobel responses (Gx, Gy) of a gray image as 2-D arrays."""
        if not img.is_gray:
            raise InvalidArgumentError(
                f"Sobel expects a single-channel image. Got {img.channels} channels; convert to luminance first."
            )
        plane = img.plane
        gx = ndimage.sobel(plane, axis=1, mode="nearest")
        gy = ndimage.sobel(plane, axis=0, mode="nearest")
        return gx, gy

    @staticmethod
    def sobel(img):
        """
        L1 Sobel gradient magnitude |Gx| + |Gy| with replicate boundary.

        Args:
            img (Image): Gray image.

        Returns:
            Image: Gray gradient-magnitude image.
        """
        gx, gy = ImageUtils.sobel_components(img)
        return Image(np.abs(gx) + np.abs(gy))

    @staticmethod
    def dft2(img):
        """
        Exact 2-D DFT, F(v, u) = sum_y sum_x I(y, x) exp(-j 2 pi (u x / W + v y / H)).

        Args:
            img (Image): Gray image of any size.

        Returns:
            Spectrum: Forward-unnormalized coefficients.
        """
        if not img.is_gray:
            raise InvalidArgumentError(f"dft2 expects a single-channel image. Got {img.channels} channels.")
        return Spectrum(np.fft.fft2(img.plane))

    @staticmethod
    def idft2(spectrum):
        return Image(np.real(np.fft.ifft2(spectrum.coefficients)))

    @staticmethod
    def gaussian_field(h, w, sigma, seed, channels=1, scale=INTENSITY_SCALE):
        """
        Seeded zero-mean Gaussian field with standard deviation sigma / scale.

        Args:
            h (int): Height in pixels.
            w (int): Width in pixels.
            sigma (float): Standard deviation on the 0-`scale` intensity scale.
            seed (int): Seed for numpy's PCG64 generator.
            channels (int): 1 or 3 independent planes.
            scale (float): Intensity scale sigma is quoted on (255 by default, 1 for [0, 1]).

        Returns:
            Image: The noise field; a pure function of its arguments.
        """
        if sigma < 0:
            raise InvalidArgumentError(f"sigma must be nonnegative. Got: {sigma}")
        if sigma == 0:
            return Image(np.zeros((h, w, channels)))
        rng = np.random.default_rng(seed)
        return Image(rng.normal(0.0, sigma / scale, size=(h, w, channels)))

    @staticmethod
    def to_uint8(img):
        """Quantize to 8 bits: round(v * 255) after clamping to [0, 1]."""
        return np.round(np.clip(img.data, 0.0, 1.0) * 255.0).astype(np.uint8)

    @staticmethod
    def read_png(path):
        """
        Load an 8-bit PNG as an Image with values v / 255.

        Args:
            path (str): File to read.

        Returns:
            Image: Gray for L images, RGB for RGB / RGBA / palette images.

        Raises:
            ImageIOError: If the file is missing, undecodable or not 8-bit.
        """
        try:
            with PILImage.open(path) as pil:
                if pil.mode in ("L", "RGB"):
                    arr = np.asarray(pil)
                elif pil.mode in ("RGBA", "P", "LA"):
                    arr = np.asarray(pil.convert("RGB" if pil.mode != "LA" else "L"))
                elif pil.mode == "1":
                    arr = np.asarray(pil.convert("L"))
                else:
                    raise ImageIOError(f"Unsupported PNG mode {pil.mode!r} in {path}; only 8-bit gray and RGB are handled.")
        except ImageIOError:
            raise
        except (OSError, ValueError) as e:
            raise ImageIOError(f"Failed to read image {path}: {e}") from e
        return Image(arr.astype(np.float64) / 255.0)

    @staticmethod
    def write_png(img, path):
        """
        Save an Image as an 8-bit PNG.

        Args:
            img (Image): Gray or RGB raster.
            path (str): Destination file; parent directories are created.

        Returns:
            str: The path written.
        """
        arr = ImageUtils.to_uint8(img)
        if img.is_gray:
            arr = arr[:, :, 0]
        try:
            directory = os.path.dirname(path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            PILImage.fromarray(arr).save(path, format="PNG")
        except OSError as e:
            raise ImageIOError(f"Failed to write image {path}: {e}") from e
        logger.debug("Image saved to %s", path)
        return path
