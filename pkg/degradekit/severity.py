# severity.py

"""
This module defines the degradation registry and the severity scale: which twelve degradation kinds
exist, which modality and operator families each one touches, and how an integer severity level
1..10 maps onto concrete physical parameters.

Classes:
    Modality: The two imaging modalities (infrared, visible).
    Family: The three operator families of the imaging model (illumination, weather, sensor).
    DegradationKind: One registry entry (name, modality, families, display name, synonyms).
    ResolvedParams: Concrete alpha, epsilon, sigma, N, theta, gamma, beta, A and rain intensity.
    DegradationSpec: Modality + kind + level + optional params + seed, with a JSON codec.
    SeverityMapper: Maps (kind, level, seed) to ResolvedParams.

Methods:
    lookup_kind(name): Resolve a canonical name, display name or synonym to a DegradationKind.
    SeverityMapper.severity_to_params(kind, level, seed, jitter=False): Resolve parameters.
    DegradationSpec.resolved(jitter=False): Fill in params from the severity scale when absent.
    DegradationSpec.to_dict() / DegradationSpec.from_dict(data): JSON object codec.

Usage:
    Level 1 maps to the mild end of every parameter range and level 10 to the severe end. Scalars
    move linearly in between; blur angle and airlight are drawn from the spec seed and do not
    depend on the level.

Examples:
    >>> SeverityMapper.severity_to_params("gauss_noise", 10, seed=0).sigma
    20.0
    >>> SeverityMapper.severity_to_params("haze", 4, seed=0).beta
    1.0
    >>> spec = DegradationSpec.from_dict({"modality": "visible", "kind": "rain", "level": 4, "seed": 7})
    >>> round(spec.resolved().params.rain_intensity, 4)
    0.4667
"""

import logging
import re
from dataclasses import asdict, dataclass, replace
from enum import Enum

import numpy as np

from .exceptions import InvalidArgumentError, LevelOutOfRangeError, UnknownKindError

logger = logging.getLogger(__name__)

MIN_LEVEL = 1
MAX_LEVEL = 10
ANCHOR_LEVELS = (1, 4, 7, 10)

SEVERITY_ANCHORS = {
    1: "barely perceptible degradation",
    4: "degradation begins to interfere with human scene understanding",
    7: "degradation severely hinders human perception of the scene",
    10: "most useful information is completely obscured",
}

# (mild endpoint, severe endpoint) per scalar parameter
PARAM_RANGES = {
    "alpha": (0.93, 0.30),
    "epsilon": (1.0, 15.0),
    "sigma": (5.0, 20.0),
    "n": (3, 12),
    "gamma_low_light": (1.2, 3.0),
    "gamma_over_exposure": (0.83, 0.5),
    "beta": (0.5, 2.0),
    "rain_intensity": (0.2, 1.0),
}
THETA_RANGE = (10.0, 80.0)
AIRLIGHT_RANGE = (0.3, 0.9)
GAMMA_RANGE = (0.5, 3.0)


class Modality(str, Enum):
    INFRARED = "infrared"
    VISIBLE = "visible"


class Family(str, Enum):
    ILLUMINATION = "illumination"
    WEATHER = "weather"
    SENSOR = "sensor"


@dataclass(frozen=True)
class DegradationKind:
    """One entry of the degradation registry."""

    name: str
    modality: Modality
    families: tuple
    display_name: str
    synonyms: tuple = ()


_REGISTRY = (
    DegradationKind("blur", Modality.VISIBLE, (Family.SENSOR,), "blur", ("motion blur",)),
    DegradationKind("gauss_noise", Modality.VISIBLE, (Family.SENSOR,), "noise", ("gaussian noise", "gauss noise")),
    DegradationKind("rain", Modality.VISIBLE, (Family.WEATHER,), "rain", ("rain streaks",)),
    DegradationKind("haze", Modality.VISIBLE, (Family.WEATHER,), "haze", ("fog",)),
    DegradationKind("rain_haze", Modality.VISIBLE, (Family.WEATHER,), "rain-haze", ("rain haze", "rainy haze")),
    DegradationKind("low_light", Modality.VISIBLE, (Family.ILLUMINATION,), "low-light", ("low light", "lowlight")),
    DegradationKind(
        "over_exposure", Modality.VISIBLE, (Family.ILLUMINATION,), "over-exposure", ("overexposure", "over exposure")
    ),
    DegradationKind(
        "low_light_noise",
        Modality.VISIBLE,
        (Family.ILLUMINATION, Family.SENSOR),
        "low-light noise",
        ("low light noise", "lowlight noise"),
    ),
    DegradationKind("low_contrast", Modality.INFRARED, (Family.SENSOR,), "low-contrast", ("low contrast", "lowcontrast")),
    DegradationKind("random_noise", Modality.INFRARED, (Family.SENSOR,), "random noise", ("random-noise",)),
    DegradationKind("stripe_noise", Modality.INFRARED, (Family.SENSOR,), "stripe noise", ("stripe-noise", "stripes")),
    DegradationKind(
        "contrast_stripe",
        Modality.INFRARED,
        (Family.SENSOR,),
        "low-contrast stripe noise",
        ("low contrast stripe noise", "contrast stripe"),
    ),
)

KINDS = {kind.name: kind for kind in _REGISTRY}


def _normalize_name(name):
    return re.sub(r"\s+", " ", str(name).strip().lower())


_ALIASES = {}
for _kind in _REGISTRY:
    for _alias in (_kind.name, _kind.name.replace("_", " "), _kind.display_name, *_kind.synonyms):
        _ALIASES[_normalize_name(_alias)] = _kind


def lookup_kind(name):
    """
    Resolve a kind by canonical name, display name or synonym (case and whitespace insensitive).

    Args:
        name (str or DegradationKind): The kind to resolve.

    Returns:
        DegradationKind: The registry entry.

    Raises:
        UnknownKindError: If nothing in the registry matches.
    """
    if isinstance(name, DegradationKind):
        return name
    kind = _ALIASES.get(_normalize_name(name))
    if kind is None:
        raise UnknownKindError(name)
    return kind


def check_level(level):
    if isinstance(level, bool) or not isinstance(level, (int, np.integer)):
        raise LevelOutOfRangeError(level)
    if not MIN_LEVEL <= level <= MAX_LEVEL:
        raise LevelOutOfRangeError(level)
    return int(level)


@dataclass(frozen=True)
class ResolvedParams:
    """
    Physical parameters of one degradation instance; fields a kind does not use stay None.

    Attributes:
        alpha (float): Infrared contrast factor, in (0, 1).
        epsilon (float): Stripe noise std on the 0-255 scale, in [1, 15].
        sigma (float): Gaussian noise std on the 0-255 scale, in [5, 20].
        n (int): Motion-blur length, in [3, 12].
        theta (float): Motion-blur angle in degrees, in [10, 80].
        gamma (float): Illumination exponent, in [0.5, 3].
        beta (float): Haze density, in [0.5, 2.0].
        airlight (float): Atmospheric light A, in [0.3, 0.9].
        rain_intensity (float): Rain-streak amplitude, >= 0.
    """

    alpha: float = None
    epsilon: float = None
    sigma: float = None
    n: int = None
    theta: float = None
    gamma: float = None
    beta: float = None
    airlight: float = None
    rain_intensity: float = None

    def validate(self):
        """Raise InvalidArgumentError if any set field leaves its range."""
        checks = (
            ("alpha", self.alpha, lambda v: 0.0 < v < 1.0, "(0, 1)"),
            ("epsilon", self.epsilon, lambda v: 1.0 <= v <= 15.0, "[1, 15]"),
            ("sigma", self.sigma, lambda v: 5.0 <= v <= 20.0, "[5, 20]"),
            ("n", self.n, lambda v: 3 <= v <= 12 and float(v).is_integer(), "integers in [3, 12]"),
            ("theta", self.theta, lambda v: THETA_RANGE[0] <= v <= THETA_RANGE[1], "[10, 80]"),
            ("gamma", self.gamma, lambda v: GAMMA_RANGE[0] <= v <= GAMMA_RANGE[1], "[0.5, 3]"),
            ("beta", self.beta, lambda v: 0.5 <= v <= 2.0, "[0.5, 2.0]"),
            ("airlight", self.airlight, lambda v: AIRLIGHT_RANGE[0] <= v <= AIRLIGHT_RANGE[1], "[0.3, 0.9]"),
            ("rain_intensity", self.rain_intensity, lambda v: v >= 0.0, "[0, inf)"),
        )
        for name, value, ok, allowed in checks:
            if value is not None and not ok(value):
                raise InvalidArgumentError(f"Parameter {name}={value} is outside {allowed}.")
        return self

    def to_dict(self):
        return {key: value for key, value in asdict(self).items() if value is not None}

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidArgumentError(f"Unknown parameter names: {sorted(unknown)}")
        return cls(**data).validate()


@dataclass(frozen=True)
class DegradationSpec:
    """
    A single degradation applied to one modality.

    Args:
        modality (Modality or str): "infrared" or "visible".
        kind (str): Registry name, display name or synonym.
        level (int): Severity 1..10.
        params (ResolvedParams): Concrete parameters; None until resolved.
        seed (int): Seed for every random draw of this instance.
    """

    modality: Modality
    kind: str
    level: int
    params: ResolvedParams = None
    seed: int = 0

    def __post_init__(self):
        try:
            modality = self.modality if isinstance(self.modality, Modality) else Modality(str(self.modality).strip().lower())
        except ValueError:
            raise InvalidArgumentError(f"Unknown modality: {self.modality!r}") from None
        kind = lookup_kind(self.kind)
        if kind.modality is not modality:
            raise InvalidArgumentError(
                f"Degradation {kind.name!r} applies to the {kind.modality.value} modality, not {modality.value}."
            )
        object.__setattr__(self, "modality", modality)
        object.__setattr__(self, "kind", kind.name)
        object.__setattr__(self, "level", check_level(self.level))
        object.__setattr__(self, "seed", int(self.seed))
        if self.params is not None:
            self.params.validate()

    @property
    def kind_info(self):
        return KINDS[self.kind]

    @property
    def families(self):
        return self.kind_info.families

    def resolved(self, jitter=False):
        """Return a copy whose params are filled from the severity scale if they were absent."""
        if self.params is not None:
            return self
        return replace(self, params=SeverityMapper.severity_to_params(self.kind, self.level, self.seed, jitter=jitter))

    def to_dict(self):
        data = {"modality": self.modality.value, "kind": self.kind, "level": self.level, "seed": self.seed}
        if self.params is not None:
            data["params"] = self.params.to_dict()
        return data

    @classmethod
    def from_dict(cls, data):
        """
        Build a spec from a JSON object {modality, kind, level, seed, params?}.

        A missing modality is inferred from the kind; a missing seed defaults to 0.
        """
        if not isinstance(data, dict):
            raise InvalidArgumentError(f"A degradation spec must be a JSON object. Got: {type(data).__name__}")
        if "kind" not in data or "level" not in data:
            raise InvalidArgumentError(f"A degradation spec needs 'kind' and 'level'. Got keys: {sorted(data)}")
        kind = lookup_kind(data["kind"])
        params = data.get("params")
        return cls(
            modality=data.get("modality", kind.modality),
            kind=kind.name,
            level=data["level"],
            params=ResolvedParams.from_dict(params) if params is not None else None,
            seed=data.get("seed", 0),
        )


def _lerp(key, level):
    lo, hi = PARAM_RANGES[key]
    return lo + (hi - lo) * (level - 1) / 9


class SeverityMapper:
    """Maps severity levels onto the physical parameter ranges of each degradation kind."""

    @staticmethod
    def effective_level(level, seed, jitter=False):
        """The level used for interpolation; jitter moves it by at most half a step."""
        level = check_level(level)
        if not jitter:
            return level
        offset = np.random.default_rng([seed, 0]).uniform(-0.5, 0.5)
        return float(np.clip(level + offset, MIN_LEVEL, MAX_LEVEL))

    @staticmethod
    def severity_to_params(kind, level, seed=0, jitter=False):
        """
        Resolve the physical parameters of a kind at a severity level.

        Args:
            kind (str or DegradationKind): Degradation kind.
            level (int): Severity 1..10.
            seed (int): Seed for angle / airlight draws and optional jitter.
            jitter (bool): Perturb the level by up to half a step before interpolating.

        Returns:
            ResolvedParams: Parameters inside the documented ranges.

        Raises:
            LevelOutOfRangeError: If level is outside 1..10.
            UnknownKindError: If kind is not registered.
        """
        kind = lookup_kind(kind)
        lvl = SeverityMapper.effective_level(level, seed, jitter)
        name = kind.name
        values = {}

        if name in ("low_contrast", "contrast_stripe"):
            values["alpha"] = 1.0 - 0.07 * lvl
        if name in ("stripe_noise", "contrast_stripe"):
            values["epsilon"] = _lerp("epsilon", lvl)
        if name in ("gauss_noise", "random_noise", "low_light_noise"):
            values["sigma"] = _lerp("sigma", lvl)
        if name == "blur":
            values["n"] = int(np.floor(_lerp("n", lvl) + 0.5))
            values["theta"] = float(np.random.default_rng([seed, 1]).uniform(*THETA_RANGE))
        if name in ("low_light", "low_light_noise"):
            values["gamma"] = _lerp("gamma_low_light", lvl)
        if name == "over_exposure":
            values["gamma"] = _lerp("gamma_over_exposure", lvl)
        if name in ("haze", "rain_haze"):
            values["beta"] = _lerp("beta", lvl)
            values["airlight"] = float(np.random.default_rng([seed, 2]).uniform(*AIRLIGHT_RANGE))
        if name in ("rain", "rain_haze"):
            values["rain_intensity"] = _lerp("rain_intensity", lvl)

        params = ResolvedParams(**values).validate()
        logger.debug("Resolved %s level %s (seed %s) to %s", name, level, seed, params)
        return params
