# signatures.py

"""
This module defines the `SignatureExtractor` class, which summarizes how an image is degraded in the
spatial and frequency domains, and the alignment loss that compares a visual embedding with a text
embedding.

Classes:
    SignatureVector: Radial energy profile, band ratios, spatial statistics and stripe indicator.
    Embedding: A finite D-dimensional vector.
    SignatureExtractor: Computes signatures, projects them to embeddings and exports them.

Methods:
    signature(img): The SignatureVector of a gray image.
    radial_profile(spectrum): Spectral energy summed per normalized-radius bin.
    band_ratios(spectrum): Low / mid / high frequency energy fractions.
    spatial_stats(img): Mean, variance and mean squared Sobel magnitude.
    column_autocorr(img): Mean lag-1 autocorrelation down the columns of the row-detrended image.
    embed(signature, dim, seed): Fixed seeded random projection of a signature.
    alignment_loss(p_vis, p_text, lambda1, lambda2): lambda1 * ||p_vis - p_text||^2 + lambda2 * (1 - cos).
    to_csv(signatures, path): One row per signature.

Usage:
    Signatures are deterministic and cheap; stripe noise shows up as a column_autocorr close to 1,
    blur as a shrinking high band and Gaussian noise as a growing one.

Examples:
    >>> extractor = SignatureExtractor()
    >>> sig = extractor.signature(ImageUtils.luminance(img))
    >>> sig.band_ratios
    (0.91, 0.06, 0.03)
    >>> extractor.alignment_loss(extractor.embed(sig), text_embedding)
"""

import json
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import ndimage

from .exceptions import InvalidArgumentError, UndefinedCosineError
from .image_utils import Image, ImageUtils

logger = logging.getLogger(__name__)

DEFAULT_BINS = 32
DEFAULT_EMBEDDING_DIM = 512
MAX_RADIUS = 0.5 * np.sqrt(2.0)
BAND_EDGES = (1.0 / 6.0, 1.0 / 3.0)
DETREND_WINDOW = 5
DEFAULT_LAMBDAS = (1.0, 3.0)


@dataclass(frozen=True)
class SignatureVector:
    """
    Hand-crafted degradation signature of one gray image.

    Attributes:
        radial_profile (tuple): Energy per radius bin, bin 0 holding DC.
        band_ratios (tuple): (low, mid, high) energy fractions summing to 1.
        spatial_stats (tuple): (mean, variance, gradient energy).
        column_autocorr (float): Stripe-noise indicator in [-1, 1].
    """

    radial_profile: tuple
    band_ratios: tuple
    spatial_stats: tuple
    column_autocorr: float

    def as_array(self):
        return np.concatenate(
            [
                np.asarray(self.radial_profile, dtype=np.float64),
                np.asarray(self.band_ratios, dtype=np.float64),
                np.asarray(self.spatial_stats, dtype=np.float64),
                [self.column_autocorr],
            ]
        )

    def to_dict(self):
        mean, variance, gradient_energy = self.spatial_stats
        low, mid, high = self.band_ratios
        return {
            "radial_profile": [float(v) for v in self.radial_profile],
            "band_ratios": {"low": float(low), "mid": float(mid), "high": float(high)},
            "spatial_stats": {"mean": float(mean), "variance": float(variance), "gradient_energy": float(gradient_energy)},
            "column_autocorr": float(self.column_autocorr),
        }

    @classmethod
    def from_dict(cls, data):
        bands = data["band_ratios"]
        stats = data["spatial_stats"]
        return cls(
            radial_profile=tuple(float(v) for v in data["radial_profile"]),
            band_ratios=(float(bands["low"]), float(bands["mid"]), float(bands["high"])),
            spatial_stats=(float(stats["mean"]), float(stats["variance"]), float(stats["gradient_energy"])),
            column_autocorr=float(data["column_autocorr"]),
        )

    def to_row(self):
        """Flat mapping for tabular export."""
        row = {f"radial_{k:02d}": float(v) for k, v in enumerate(self.radial_profile)}
        row.update(zip(("band_low", "band_mid", "band_high"), map(float, self.band_ratios)))
        row.update(zip(("mean", "variance", "gradient_energy"), map(float, self.spatial_stats)))
        row["column_autocorr"] = float(self.column_autocorr)
        return row


@dataclass(frozen=True, eq=False)
class Embedding:
    """A finite vector standing in for a visual or text embedding."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True).ravel()
        if values.size == 0:
            raise InvalidArgumentError("An embedding needs at least one value.")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("Embedding values must be finite.")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dim(self):
        return self.values.size

    def norm(self):
        return float(np.linalg.norm(self.values))


class SignatureExtractor:
    """
    Extracts deterministic degradation signatures from gray images.
    """

    def __init__(self, bins=DEFAULT_BINS):
        """
        Initializes the extractor.

        Args:
            bins (int): Number of radial bins over [0, 0.5 * sqrt(2)].
        """
        if bins < 1:
            raise InvalidArgumentError(f"bins must be positive. Got: {bins}")
        self.bins = int(bins)

    def signature(self, img):
        """
        Computes the signature of a gray image.

        Args:
            img (Image): Non-empty single-channel image.

        Returns:
            SignatureVector: The signature.
        """
        if not img.is_gray:
            raise InvalidArgumentError(f"Signatures are computed on gray images. Got {img.channels} channels.")
        spectrum = ImageUtils.dft2(img)
        return SignatureVector(
            radial_profile=tuple(self.radial_profile(spectrum)),
            band_ratios=self.band_ratios(spectrum),
            spatial_stats=self.spatial_stats(img),
            column_autocorr=self.column_autocorr(img),
        )

    def radial_profile(self, spectrum):
        radius = spectrum.radius_grid()
        index = np.minimum((radius / MAX_RADIUS * self.bins).astype(int), self.bins - 1)
        return np.bincount(index.ravel(), weights=spectrum.energy().ravel(), minlength=self.bins)

    @staticmethod
    def band_ratios(spectrum):
        """Energy fractions below 1/6, between 1/6 and 1/3, and above 1/3 of normalized radius."""
        radius = spectrum.radius_grid()
        energy = spectrum.energy()
        total = energy.sum()
        if total <= 0:
            return (1.0, 0.0, 0.0)
        low = energy[radius < BAND_EDGES[0]].sum()
        mid = energy[(radius >= BAND_EDGES[0]) & (radius < BAND_EDGES[1])].sum()
        high = energy[radius >= BAND_EDGES[1]].sum()
        return (float(low / total), float(mid / total), float(high / total))

    @staticmethod
    def spatial_stats(img):
        plane = img.plane
        gradient = ImageUtils.sobel(img).plane
        return (float(plane.mean()), float(plane.var()), float(np.mean(gradient ** 2)))

    @staticmethod
    def column_autocorr(img):
        """
        Stripe indicator: the image minus its horizontal 5-tap box blur, then the lag-1
        autocorrelation down each column, averaged over columns that carry energy.
        """
        plane = img.plane
        if plane.shape[0] < 2:
            return 0.0
        residual = plane - ndimage.uniform_filter1d(plane, size=DETREND_WINDOW, axis=1, mode="nearest")
        head, tail = residual[:-1, :], residual[1:, :]
        denominator = np.sqrt(np.sum(head ** 2, axis=0) * np.sum(tail ** 2, axis=0))
        # ignore columns flat to rounding error
        valid = denominator > 1e-12 * max(1.0, float(np.max(np.abs(plane))) ** 2)
        if not np.any(valid):
            return 0.0
        correlations = np.sum(head * tail, axis=0)[valid] / denominator[valid]
        return float(np.mean(correlations))

    @staticmethod
    def embed(signature, dim=DEFAULT_EMBEDDING_DIM, seed=0):
        """
        Projects a signature to `dim` values with a fixed seeded Gaussian matrix.

        Args:
            signature (SignatureVector): The signature to project.
            dim (int): Embedding dimension.
            seed (int): Seed of the projection matrix; equal seeds give equal projections.

        Returns:
            Embedding: The projected vector.
        """
        features = signature.as_array()
        # log scale keeps the DC bin from swamping the projection
        features = np.sign(features) * np.log1p(np.abs(features))
        projection = np.random.default_rng(seed).standard_normal((dim, features.size)) / np.sqrt(features.size)
        return Embedding(projection @ features)

    @staticmethod
    def alignment_loss(p_vis, p_text, lambda1=DEFAULT_LAMBDAS[0], lambda2=DEFAULT_LAMBDAS[1]):
        """
        Alignment between a visual and a text embedding.

        Computes lambda1 * sum((p_vis - p_text)^2) + lambda2 * (1 - cos(p_vis, p_text)). The squared
        term is a sum, not a mean.

        Args:
            p_vis (Embedding): Visual embedding.
            p_text (Embedding): Text embedding of equal dimension.
            lambda1 (float): Weight of the squared distance.
            lambda2 (float): Weight of the cosine term.

        Returns:
            float: The nonnegative loss.

        Raises:
            InvalidArgumentError: If dimensions differ or a weight is negative.
            UndefinedCosineError: If either embedding has zero norm.
        """
        p_vis = p_vis if isinstance(p_vis, Embedding) else Embedding(p_vis)
        p_text = p_text if isinstance(p_text, Embedding) else Embedding(p_text)
        if p_vis.dim != p_text.dim:
            raise InvalidArgumentError(f"Embedding dimensions differ: {p_vis.dim} vs {p_text.dim}")
        if lambda1 < 0 or lambda2 < 0:
            raise InvalidArgumentError(f"Loss weights must be nonnegative. Got: ({lambda1}, {lambda2})")
        norm_vis, norm_text = p_vis.norm(), p_text.norm()
        if norm_vis == 0 or norm_text == 0:
            raise UndefinedCosineError("Cosine similarity is undefined for a zero-norm embedding.")
        squared = float(np.sum((p_vis.values - p_text.values) ** 2))
        cosine = float(np.dot(p_vis.values, p_text.values) / (norm_vis * norm_text))
        return lambda1 * squared + lambda2 * max(0.0, 1.0 - cosine)

    @staticmethod
    def to_csv(signatures, path):
        """
        Writes signatures as CSV rows.

        Args:
            signatures (dict): Mapping name -> SignatureVector.
            path (str): Output file.
        """
        rows = [{"name": name, **sig.to_row()} for name, sig in signatures.items()]
        pd.DataFrame(rows).to_csv(path, index=False)
        logger.info("Signatures saved to %s", path)

    @staticmethod
    def to_json(signature, path):
        with open(path, "w", encoding="utf-8") as file:
            json.dump(signature.to_dict(), file, indent=2)
        logger.info("Signature saved to %s", path)

    @staticmethod
    def spectrum_image(img):
        """Centered log-magnitude spectrum scaled by its maximum, ready for PNG export."""
        centered = ImageUtils.dft2(img).centered()
        peak = centered.max()
        return Image(centered / peak if peak > 0 else centered)
