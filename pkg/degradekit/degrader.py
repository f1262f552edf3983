# degrader.py

"""
This module defines the physics-driven degraded imaging model. A clean image passes through up to
three operator families, illumination first, then weather, then sensor:

    D = P_sensor(P_weather(P_illumination(I)))

Classes:
    SideMaps: Optional illumination and depth maps injected in place of external estimators.
    Degrader: Base class holding the intensity scale and the shared clamp step.
    SensorDegrader: Infrared contrast / stripe noise, motion blur and Gaussian noise.
    IlluminationDegrader: Retinex-style illumination distortion D = (I / L) * L^gamma.
    WeatherDegrader: Haze through a transmission map plus additive rain streaks.
    ImagingModel: Composes the families per modality in their fixed order.

Methods:
    SensorDegrader.apply_contrast_stripe(ir, alpha, epsilon, seed): alpha * I + 1_H n^T.
    SensorDegrader.make_blur_kernel(n, theta): Normalized line kernel of length n at angle theta.
    SensorDegrader.apply_noise_blur(img, kernel, sigma, seed): Blur, then add Gaussian noise.
    IlluminationDegrader.estimate_illumination(img): Max-RGB, 15x15 box smoothing, floor 1e-3.
    IlluminationDegrader.apply_illumination(img, gamma, maps, seed): Relight through L^gamma.
    WeatherDegrader.fallback_depth(h, w, sky_far): Vertical ramp depth in [0, 1).
    WeatherDegrader.synthesize_rain_layer(h, w, intensity, seed): Seeded rain-streak layer R.
    WeatherDegrader.apply_weather(img, beta, airlight, rain_intensity, maps, seed): I t + A (1 - t) + R.
    ImagingModel.compose(ir, vi, specs, maps): Degrade an infrared / visible pair.

Usage:
    Every operator clamps once, at its end; pass clamp=False to inspect the raw result. At the
    identity point of its parameters each operator returns its input unchanged.

Examples:
    >>> model = ImagingModel()
    >>> specs = [DegradationSpec("visible", "low_light", 6, seed=1), DegradationSpec("infrared", "stripe_noise", 8, seed=2)]
    >>> ir_degraded, vi_degraded = model.compose(ir, vi, specs)
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .exceptions import InvalidArgumentError
from .image_utils import INTENSITY_SCALE, BlurKernel, Image, ImageUtils
from .severity import GAMMA_RANGE, THETA_RANGE, Family, Modality

logger = logging.getLogger(__name__)

ILLUMINATION_FLOOR = 1e-3
ILLUMINATION_WINDOW = 15
DEFAULT_AIRLIGHT = 0.6
RAIN_PERCENTILE = 98.0
RAIN_STREAK_LENGTH = 9
RAIN_ANGLE_RANGE = (70.0, 110.0)
KERNEL_SAMPLES_PER_PIXEL = 100


@dataclass(frozen=True, eq=False)
class SideMaps:
    """
    Externally estimated maps; when a map is absent the built-in fallback runs.

    Args:
        illumination (Image): Gray illumination map L with values in (0, 1].
        depth (Image): Gray scene depth d(x), nonnegative, in its own units.
    """

    illumination: Image = None
    depth: Image = None

    def __post_init__(self):
        for name in ("illumination", "depth"):
            value = getattr(self, name)
            if value is not None and not value.is_gray:
                raise InvalidArgumentError(f"The {name} map must be single-channel. Got {value.channels} channels.")
        if self.illumination is not None and np.any(self.illumination.data <= 0):
            raise InvalidArgumentError("The illumination map must be strictly positive.")
        if self.depth is not None and np.any(self.depth.data < 0):
            raise InvalidArgumentError("The depth map must be nonnegative.")

    def check_dimensions(self, img):
        for name in ("illumination", "depth"):
            value = getattr(self, name)
            if value is not None and (value.height, value.width) != (img.height, img.width):
                raise InvalidArgumentError(
                    f"The {name} map is {value.height}x{value.width} but the image is {img.height}x{img.width}."
                )


class Degrader:
    """
    Base class for the operator families of the imaging model.
    """

    family = None

    def __init__(self, scale=INTENSITY_SCALE):
        """
        Initializes the degrader.

        Args:
            scale (float): Intensity scale on which noise parameters are quoted (255 by default).
        """
        if not scale > 0:
            raise InvalidArgumentError(f"scale must be positive. Got: {scale}")
        self.scale = scale

    @staticmethod
    def finish(data, clamp=True):
        """Wrap a raw array as an Image, clamping to [0, 1] unless told not to."""
        if clamp:
            data = np.clip(data, 0.0, 1.0)
        return Image(data)

    def apply(self, img, spec, maps=None):
        """
        Applies this family's part of a resolved spec.

        Args:
            img (Image): Input image of the spec's modality.
            spec (DegradationSpec): Spec with resolved params.
            maps (SideMaps): Optional side maps.

        Returns:
            Image: The degraded image.
        """
        raise NotImplementedError


class SensorDegrader(Degrader):
    """
    Sensor-related distortions: infrared contrast loss with stripe noise, motion blur and noise.
    """

    family = Family.SENSOR

    def apply_contrast_stripe(self, ir, alpha, epsilon, seed, clamp=True):
        """
        Scales contrast and adds column-wise stripe noise: alpha * I + 1_H n^T.

        Args:
            ir (Image): Gray infrared image.
            alpha (float): Contrast factor in (0, 1].
            epsilon (float): Stripe std on the intensity scale; n ~ N(0, (epsilon / scale)^2).
            seed (int): Seed of the stripe vector.
            clamp (bool): Clamp the result to [0, 1].

        Returns:
            Image: The degraded image; every row received the same noise vector.
        """
        if not ir.is_gray:
            raise InvalidArgumentError(f"Stripe noise applies to single-channel images. Got {ir.channels} channels.")
        if not 0.0 < alpha <= 1.0:
            raise InvalidArgumentError(f"alpha must be in (0, 1]. Got: {alpha}")
        if epsilon < 0:
            raise InvalidArgumentError(f"epsilon must be nonnegative. Got: {epsilon}")
        stripes = self.stripe_vector(ir.width, epsilon, seed)
        data = alpha * ir.data + stripes[np.newaxis, :, np.newaxis]
        return self.finish(data, clamp)

    def stripe_vector(self, width, epsilon, seed):
        """The per-column noise vector n of length `width`."""
        if epsilon == 0:
            return np.zeros(width)
        return np.random.default_rng(seed).normal(0.0, epsilon / self.scale, size=width)

    @staticmethod
    def make_blur_kernel(n, theta):
        """
        Builds the motion-blur kernel K(N, theta).

        Args:
            n (int): Blur length in pixels, 3..12.
            theta (float): Angle in degrees from horizontal, 10..80.

        Returns:
            BlurKernel: Nonnegative, unit-sum, point-symmetric kernel of odd size.
        """
        if not (3 <= n <= 12 and float(n).is_integer()):
            raise InvalidArgumentError(f"Blur length must be an integer in [3, 12]. Got: {n}")
        if not THETA_RANGE[0] <= theta <= THETA_RANGE[1]:
            raise InvalidArgumentError(f"Blur angle must be in [10, 80] degrees. Got: {theta}")
        return SensorDegrader.line_kernel(int(n), float(theta))

    @staticmethod
    def line_kernel(length, angle):
        """
        Rasterizes a centered line segment of `length` pixels at `angle` degrees with bilinear
        weights. Rows grow downward, so 45 degrees runs along the main diagonal. No range checks.
        """
        size = length if length % 2 == 1 else length + 1
        center = (size - 1) / 2.0
        half = (length - 1) / 2.0
        t = np.linspace(-half, half, KERNEL_SAMPLES_PER_PIXEL * length + 1)
        rad = np.deg2rad(angle)
        rows = center + t * np.sin(rad)
        cols = center + t * np.cos(rad)

        r0 = np.floor(rows).astype(int)
        c0 = np.floor(cols).astype(int)
        fr = rows - r0
        fc = cols - c0
        weights = np.zeros((size, size))
        for dr, dc, w in (
            (0, 0, (1 - fr) * (1 - fc)),
            (0, 1, (1 - fr) * fc),
            (1, 0, fr * (1 - fc)),
            (1, 1, fr * fc),
        ):
            rr, cc = r0 + dr, c0 + dc
            inside = (rr >= 0) & (rr < size) & (cc >= 0) & (cc < size)
            np.add.at(weights, (rr[inside], cc[inside]), w[inside])

        # point symmetry about the center
        weights = (weights + weights[::-1, ::-1]) / 2.0
        weights = weights / weights.sum()
        return BlurKernel(weights, angle=float(angle), length=length)

    def apply_noise_blur(self, img, kernel, sigma, seed, clamp=True):
        """
        Blurs with a kernel, then adds Gaussian noise: I * K + N(0, sigma^2).

        Args:
            img (Image): Gray or RGB image.
            kernel (BlurKernel): Blur kernel; `BlurKernel.identity()` disables blur.
            sigma (float): Noise std on the intensity scale; 0 disables noise.
            seed (int): Seed of the noise field.
            clamp (bool): Clamp the result to [0, 1].

        Returns:
            Image: The degraded image.
        """
        if sigma < 0:
            raise InvalidArgumentError(f"sigma must be nonnegative. Got: {sigma}")
        blurred = ImageUtils.convolve2d(img, kernel)
        noise = ImageUtils.gaussian_field(img.height, img.width, sigma, seed, channels=img.channels, scale=self.scale)
        return self.finish(blurred.data + noise.data, clamp)

    def apply(self, img, spec, maps=None):
        params = spec.params
        if params.alpha is not None or params.epsilon is not None:
            alpha = params.alpha if params.alpha is not None else 1.0
            epsilon = params.epsilon if params.epsilon is not None else 0.0
            return self.apply_contrast_stripe(img, alpha, epsilon, spec.seed)
        if params.n is not None:
            kernel = self.make_blur_kernel(params.n, params.theta if params.theta is not None else THETA_RANGE[0])
        else:
            kernel = BlurKernel.identity()
        sigma = params.sigma if params.sigma is not None else 0.0
        return self.apply_noise_blur(img, kernel, sigma, spec.seed)


class IlluminationDegrader(Degrader):
    """
    Illumination-related distortions following Retinex: D = (I / L) * L^gamma.
    """

    family = Family.ILLUMINATION

    @staticmethod
    def estimate_illumination(img):
        """
        Lightweight illumination estimate used when no map is supplied.

        Args:
            img (Image): RGB (or gray) image.

        Returns:
            Image: Gray map: per-pixel channel max, 15x15 box mean, floored at 1e-3.
        """
        max_rgb = img.data.max(axis=2)
        smoothed = ndimage.uniform_filter(max_rgb, size=ILLUMINATION_WINDOW, mode="nearest")
        return Image(np.maximum(smoothed, ILLUMINATION_FLOOR))

    def apply_illumination(self, img, gamma, maps=None, seed=0, clamp=True):
        """
        Relights an image through its illumination map.

        Args:
            img (Image): RGB image (gray accepted).
            gamma (float): Exponent in [0.5, 3]; > 1 darkens, < 1 brightens, 1 is the identity.
            maps (SideMaps): Optional precomputed illumination map.
            seed (int): Unused; the operator is deterministic.
            clamp (bool): Clamp the result to [0, 1].

        Returns:
            Image: The relit image.
        """
        if not GAMMA_RANGE[0] <= gamma <= GAMMA_RANGE[1]:
            raise InvalidArgumentError(f"gamma must be in [0.5, 3]. Got: {gamma}")
        if maps is not None and maps.illumination is not None:
            maps.check_dimensions(img)
            illumination = maps.illumination.plane
        else:
            illumination = self.estimate_illumination(img).plane
        illumination = np.maximum(illumination, ILLUMINATION_FLOOR)
        # (I / L) * L^gamma, written as I * L^(gamma - 1) so that gamma = 1 is exact
        gain = np.power(illumination, gamma - 1.0)
        return self.finish(img.data * gain[:, :, np.newaxis], clamp)

    def apply(self, img, spec, maps=None):
        return self.apply_illumination(img, spec.params.gamma, maps, spec.seed)


class WeatherDegrader(Degrader):
    """
    Weather-related distortions: D = I * t + A * (1 - t) + R with t = exp(-beta * d).
    """

    family = Family.WEATHER

    def __init__(self, scale=INTENSITY_SCALE, sky_far=False):
        """
        Initializes the weather degrader.

        Args:
            scale (float): Intensity scale of noise parameters.
            sky_far (bool): Make the fallback depth grow toward the top row instead of the bottom.
        """
        super().__init__(scale)
        self.sky_far = sky_far

    @staticmethod
    def fallback_depth(h, w, sky_far=False):
        """Vertical ramp d(x, y) = y / H, or 1 - y / H with sky_far."""
        ramp = np.arange(h, dtype=np.float64) / h
        if sky_far:
            ramp = 1.0 - ramp
        return Image(np.repeat(ramp[:, np.newaxis], w, axis=1))

    @staticmethod
    def synthesize_rain_layer(h, w, intensity, seed):
        """
        Builds an additive rain-streak layer.

        Seeded Gaussian noise is thresholded at its 98th percentile, smeared by a length-9 line
        kernel at a seeded angle in [70, 110] degrees and rescaled so the brightest streak equals
        `intensity`.

        Args:
            h (int): Height.
            w (int): Width.
            intensity (float): Peak streak amplitude.
            seed (int): Seed for drops and angle.

        Returns:
            np.ndarray: H x W layer R with values in [0, intensity].
        """
        if intensity == 0:
            return np.zeros((h, w))
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal((h, w))
        angle = rng.uniform(*RAIN_ANGLE_RANGE)
        drops = (noise > np.percentile(noise, RAIN_PERCENTILE)).astype(np.float64)
        kernel = SensorDegrader.line_kernel(RAIN_STREAK_LENGTH, angle)
        streaks = ndimage.convolve(drops, kernel.weights, mode="nearest")
        peak = streaks.max()
        if peak > 0:
            streaks = streaks / peak
        return intensity * streaks

    def apply_weather(self, img, beta, airlight, rain_intensity, maps=None, seed=0, clamp=True):
        """
        Adds haze and rain.

        Args:
            img (Image): RGB image (gray accepted).
            beta (float): Haze density in [0.5, 2.0], or 0 for no haze.
            airlight (float): Atmospheric light A in [0.3, 0.9].
            rain_intensity (float): Peak rain amplitude, >= 0.
            maps (SideMaps): Optional depth map in its own units; otherwise the [0, 1) ramp.
            seed (int): Seed of the rain layer.
            clamp (bool): Clamp the result to [0, 1].

        Returns:
            Image: The degraded image.
        """
        if not (beta == 0 or 0.5 <= beta <= 2.0):
            raise InvalidArgumentError(f"beta must be 0 or in [0.5, 2.0]. Got: {beta}")
        if not 0.3 <= airlight <= 0.9:
            raise InvalidArgumentError(f"airlight must be in [0.3, 0.9]. Got: {airlight}")
        if rain_intensity < 0:
            raise InvalidArgumentError(f"rain_intensity must be nonnegative. Got: {rain_intensity}")
        if maps is not None and maps.depth is not None:
            maps.check_dimensions(img)
            depth = maps.depth.plane
        else:
            depth = self.fallback_depth(img.height, img.width, self.sky_far).plane
        transmission = np.exp(-beta * depth)[:, :, np.newaxis]
        rain = self.synthesize_rain_layer(img.height, img.width, rain_intensity, seed)
        data = img.data * transmission + airlight * (1.0 - transmission) + rain[:, :, np.newaxis]
        return self.finish(data, clamp)

    def apply(self, img, spec, maps=None):
        params = spec.params
        beta = params.beta if params.beta is not None else 0.0
        airlight = params.airlight if params.airlight is not None else DEFAULT_AIRLIGHT
        rain = params.rain_intensity if params.rain_intensity is not None else 0.0
        return self.apply_weather(img, beta, airlight, rain, maps, spec.seed)


class ImagingModel:
    """
    Composes the operator families per modality: illumination, then weather, then sensor.
    """

    FAMILY_ORDER = (Family.ILLUMINATION, Family.WEATHER, Family.SENSOR)

    def __init__(self, scale=INTENSITY_SCALE, sky_far=False, jitter=False):
        """
        Initializes the imaging model.

        Args:
            scale (float): Intensity scale of noise parameters.
            sky_far (bool): Orientation of the fallback depth ramp.
            jitter (bool): Jitter levels when resolving specs without params.
        """
        self.scale = scale
        self.sky_far = sky_far
        self.jitter = jitter
        self.degraders = {
            Family.ILLUMINATION: IlluminationDegrader(scale),
            Family.WEATHER: WeatherDegrader(scale, sky_far=sky_far),
            Family.SENSOR: SensorDegrader(scale),
        }

    def plan(self, specs):
        """
        Groups resolved specs by (modality, family).

        Raises:
            InvalidArgumentError: If two specs claim the same family of one modality.
        """
        stages = {Modality.INFRARED: {}, Modality.VISIBLE: {}}
        for spec in specs:
            spec = spec.resolved(jitter=self.jitter)
            for family in spec.families:
                taken = stages[spec.modality].get(family)
                if taken is not None:
                    raise InvalidArgumentError(
                        f"Both {taken.kind!r} and {spec.kind!r} are {family.value} degradations of the "
                        f"{spec.modality.value} modality; at most one is allowed."
                    )
                stages[spec.modality][family] = spec
        return stages

    def degrade(self, img, stage_specs, maps=None):
        for family in self.FAMILY_ORDER:
            spec = stage_specs.get(family)
            if spec is not None:
                logger.debug("Applying %s (%s) at level %s", spec.kind, family.value, spec.level)
                img = self.degraders[family].apply(img, spec, maps)
        return img

    def compose(self, ir, vi, specs, maps=None):
        """
        Degrades an infrared / visible pair.

        Args:
            ir (Image): Clean infrared image.
            vi (Image): Clean visible image.
            specs (list): DegradationSpecs; list order does not matter.
            maps (SideMaps): Optional side maps for the visible image.

        Returns:
            tuple: (degraded infrared, degraded visible). A modality without specs is returned as is.
        """
        stages = self.plan(specs)
        ir_out = self.degrade(ir, stages[Modality.INFRARED], maps)
        vi_out = self.degrade(vi, stages[Modality.VISIBLE], maps)
        return ir_out, vi_out
