from .exceptions import (
    DatasetWriteError,
    DegradeKitError,
    ImageIOError,
    InvalidArgumentError,
    LevelOutOfRangeError,
    PromptParseError,
    UndefinedCosineError,
    UnknownKindError,
    UnsupportedArityError,
)
from .image_utils import BlurKernel, Image, ImageUtils, Spectrum
from .severity import DegradationKind, DegradationSpec, Family, Modality, ResolvedParams, SeverityMapper, lookup_kind
from .degrader import IlluminationDegrader, ImagingModel, SensorDegrader, SideMaps, WeatherDegrader
from .prompt_bank import PromptBank, PromptTemplate
from .signatures import Embedding, SignatureExtractor, SignatureVector
from .fusion_math import AttentionWeights, FeatureMap, FusionMath, ModulationParams
from .losses import FusionLosses, FusionMetrics, LossReport, LossWeights
from .dataset import CleanPair, DatasetManifest, DatasetSynthesizer, SynthConfig, VerificationReport, discover_pairs

__version__ = "0.1.0"
