# fusion_math.py

"""
This module defines the fixed-weight numeric kernels of the fusion mechanism: cross-attention with
swapped queries between the infrared and visible features, channel concatenation, and the
prompt-driven residual modulation (1 + gamma) * F + beta. Nothing here is trained; weights and
modulation parameters are inputs.

Classes:
    FeatureMap: T x C token matrix.
    AttentionWeights: Query / key / value projections of one modality.
    ModulationParams: Per-channel gamma and beta vectors.
    FusionMath: Static kernels operating on the types above.

Methods:
    cross_attention_swap(f_ir, f_vi, weights_ir, weights_vi=None): Each modality attends with the other's queries.
    concat_fuse(f_ir, f_vi): [F_ir, F_vi] along channels.
    prompt_modulate(f, params): (1 + gamma) * F + beta, broadcast over tokens.

Examples:
    >>> f_ir = FeatureMap.from_image(ir)
    >>> f_vi = FeatureMap.from_image(ImageUtils.luminance(vi))
    >>> w = AttentionWeights.seeded(dim=1, seed=0)
    >>> a_ir, a_vi = FusionMath.cross_attention_swap(f_ir, f_vi, w)
    >>> fused = FusionMath.prompt_modulate(FusionMath.concat_fuse(a_ir, a_vi), ModulationParams.identity(2))
"""

import json
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import softmax

from .exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)


def _finite_matrix(values, name):
    arr = np.array(values, dtype=np.float64, copy=True)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} must contain finite values only.")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """
    Feature tokens of one modality.

    Args:
        data (array-like): T x C matrix, T >= 1. C may be 0 (an empty map).
    """

    data: np.ndarray

    def __post_init__(self):
        data = _finite_matrix(self.data, "FeatureMap")
        if data.ndim != 2 or data.shape[0] < 1:
            raise InvalidArgumentError(f"FeatureMap must be a T x C matrix with T >= 1. Got shape: {data.shape}")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_image(cls, img):
        """One token per pixel, one channel per image channel."""
        return cls(img.data.reshape(img.height * img.width, img.channels))

    @property
    def tokens(self):
        return self.data.shape[0]

    @property
    def dim(self):
        return self.data.shape[1]

    def split(self, dim):
        """Inverse of concatenation: the first `dim` channels and the rest."""
        if not 0 <= dim <= self.dim:
            raise InvalidArgumentError(f"Split point must be in [0, {self.dim}]. Got: {dim}")
        return FeatureMap(self.data[:, :dim]), FeatureMap(self.data[:, dim:])


@dataclass(frozen=True, eq=False)
class AttentionWeights:
    """
    Projection matrices of one modality.

    Args:
        w_q (array-like): C x C query projection.
        w_k (array-like): C x C key projection.
        w_v (array-like): C x C value projection.
    """

    w_q: np.ndarray
    w_k: np.ndarray
    w_v: np.ndarray

    def __post_init__(self):
        shapes = set()
        for name in ("w_q", "w_k", "w_v"):
            matrix = _finite_matrix(getattr(self, name), name)
            if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
                raise InvalidArgumentError(f"{name} must be square. Got shape: {matrix.shape}")
            shapes.add(matrix.shape)
            object.__setattr__(self, name, matrix)
        if len(shapes) != 1:
            raise InvalidArgumentError(f"Projection matrices must share one dimension. Got shapes: {sorted(shapes)}")

    @property
    def dim(self):
        return self.w_q.shape[0]

    @classmethod
    def identity(cls, dim):
        eye = np.eye(dim)
        return cls(eye, eye, eye)

    @classmethod
    def seeded(cls, dim, seed=0):
        """Gaussian projections scaled by 1 / sqrt(dim)."""
        rng = np.random.default_rng(seed)
        w_q, w_k, w_v = (rng.standard_normal((dim, dim)) / np.sqrt(dim) for _ in range(3))
        return cls(w_q, w_k, w_v)

    def to_dict(self):
        return {"dim": self.dim, "w_q": self.w_q.tolist(), "w_k": self.w_k.tolist(), "w_v": self.w_v.tolist()}

    @classmethod
    def from_dict(cls, data):
        try:
            weights = cls(data["w_q"], data["w_k"], data["w_v"])
        except KeyError as e:
            raise InvalidArgumentError(f"Attention weights are missing {e}.") from None
        if "dim" in data and data["dim"] != weights.dim:
            raise InvalidArgumentError(f"Declared dim {data['dim']} does not match matrices of dim {weights.dim}.")
        return weights

    @staticmethod
    def save_pair(weights_ir, weights_vi, path):
        """Writes both modalities' weights as {"infrared": ..., "visible": ...} JSON."""
        with open(path, "w", encoding="utf-8") as file:
            json.dump({"infrared": weights_ir.to_dict(), "visible": weights_vi.to_dict()}, file)
        logger.info("Attention weights saved to %s", path)

    @classmethod
    def load_pair(cls, path):
        with open(path, "r", encoding="utf-8") as file:
            data = json.load(file)
        return cls.from_dict(data["infrared"]), cls.from_dict(data["visible"])


@dataclass(frozen=True, eq=False)
class ModulationParams:
    """
    Per-channel residual modulation.

    Args:
        gamma (array-like): Length-C scale offsets; the scale applied is 1 + gamma.
        beta (array-like): Length-C shifts.
    """

    gamma: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        gamma = _finite_matrix(self.gamma, "gamma").ravel()
        beta = _finite_matrix(self.beta, "beta").ravel()
        if gamma.shape != beta.shape:
            raise InvalidArgumentError(f"gamma and beta lengths differ: {gamma.size} vs {beta.size}")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "beta", beta)

    @property
    def dim(self):
        return self.gamma.size

    @classmethod
    def identity(cls, dim):
        return cls(np.zeros(dim), np.zeros(dim))

    @classmethod
    def from_embedding(cls, embedding, projection):
        """
        Linear head producing [gamma, beta] from a prompt embedding.

        Args:
            embedding (Embedding or array-like): Length-D vector.
            projection (array-like): 2C x D matrix; the first C outputs are gamma, the rest beta.
        """
        values = getattr(embedding, "values", embedding)
        projection = np.asarray(projection, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64).ravel()
        if projection.ndim != 2 or projection.shape[0] % 2 or projection.shape[1] != values.size:
            raise InvalidArgumentError(
                f"Projection must be 2C x {values.size}. Got shape: {projection.shape}"
            )
        out = projection @ values
        half = out.size // 2
        return cls(out[:half], out[half:])

    def then(self, other):
        """The single modulation equal to applying self and then other."""
        if self.dim != other.dim:
            raise InvalidArgumentError(f"Cannot compose modulations of dim {self.dim} and {other.dim}.")
        gamma = self.gamma + other.gamma + self.gamma * other.gamma
        beta = (1.0 + other.gamma) * self.beta + other.beta
        return ModulationParams(gamma, beta)


class FusionMath:
    """Static fusion kernels."""

    @staticmethod
    def attend(queries, keys, values):
        """Row-wise softmax(Q K^T / sqrt(C)) V."""
        scores = queries @ keys.T / np.sqrt(keys.shape[1])
        return softmax(scores, axis=1) @ values

    @staticmethod
    def cross_attention_swap(f_ir, f_vi, weights_ir, weights_vi=None):
        """
        Cross-attention with swapped queries.

        Each modality is projected to Q, K, V with its own weights. The infrared output attends over
        the infrared keys and values with the visible queries, and the visible output the reverse:

            F_f^ir = softmax(Q_vi K_ir^T / sqrt(C)) V_ir
            F_f^vi = softmax(Q_ir K_vi^T / sqrt(C)) V_vi

        Args:
            f_ir (FeatureMap): Infrared features, T_ir x C.
            f_vi (FeatureMap): Visible features, T_vi x C.
            weights_ir (AttentionWeights): Infrared projections.
            weights_vi (AttentionWeights): Visible projections; defaults to weights_ir.

        Returns:
            tuple: (F_f^ir with T_vi rows, F_f^vi with T_ir rows).

        Raises:
            InvalidArgumentError: If the channel dimensions disagree or are 0.
        """
        weights_vi = weights_ir if weights_vi is None else weights_vi
        dims = {f_ir.dim, f_vi.dim, weights_ir.dim, weights_vi.dim}
        if len(dims) != 1:
            raise InvalidArgumentError(
                f"Dimension mismatch: f_ir {f_ir.dim}, f_vi {f_vi.dim}, weights {weights_ir.dim} / {weights_vi.dim}"
            )
        if f_ir.dim == 0:
            raise InvalidArgumentError("Attention needs at least one channel.")

        q_ir, k_ir, v_ir = (f_ir.data @ w for w in (weights_ir.w_q, weights_ir.w_k, weights_ir.w_v))
        q_vi, k_vi, v_vi = (f_vi.data @ w for w in (weights_vi.w_q, weights_vi.w_k, weights_vi.w_v))
        fused_ir = FusionMath.attend(q_vi, k_ir, v_ir)
        fused_vi = FusionMath.attend(q_ir, k_vi, v_vi)
        return FeatureMap(fused_ir), FeatureMap(fused_vi)

    @staticmethod
    def concat_fuse(f_ir, f_vi):
        if f_ir.tokens != f_vi.tokens:
            raise InvalidArgumentError(f"Token counts differ: {f_ir.tokens} vs {f_vi.tokens}")
        return FeatureMap(np.concatenate([f_ir.data, f_vi.data], axis=1))

    @staticmethod
    def prompt_modulate(f, params):
        """
        Residual per-channel affine transform (1 + gamma) * F + beta.

        Args:
            f (FeatureMap): T x C features.
            params (ModulationParams): Length-C gamma and beta.

        Returns:
            FeatureMap: The modulated features.
        """
        if params.dim != f.dim:
            raise InvalidArgumentError(f"Modulation has {params.dim} channels, features have {f.dim}.")
        return FeatureMap((1.0 + params.gamma)[np.newaxis, :] * f.data + params.beta[np.newaxis, :])
