# dataset.py

"""
This module defines the `DatasetSynthesizer` class, which builds a degraded infrared / visible
dataset from a directory of registered clean pairs. Every pair is degraded with every configured
kind at every configured level (plus optional composite scenarios), each record with its own seed
derived from the global seed, and the results are written as PNGs with a JSON manifest that is
enough to regenerate and verify every record.

Classes:
    CleanPair: One registered clean pair (id, paths, size).
    SynthConfig: Synthesis settings, loadable from TOML or JSON.
    ManifestRecord: One degraded pair in the manifest.
    DatasetManifest: Dataset-level metadata plus the sorted record list.
    VerificationReport: Outcome of re-deriving a manifest.
    DatasetSynthesizer: Runs synthesis and verification.

Methods:
    discover_pairs(root): Match root/ir/*.png with root/vi/*.png by file stem.
    derive_seed(global_seed, pair_id, kind, level): 64-bit per-record seed.
    DatasetSynthesizer.synthesize(pairs): Degrade, write PNGs and the manifest.
    DatasetSynthesizer.verify(manifest, root, fraction): Check counts, split, seeds, hashes and pixels.

Usage:
    Output layout is {output_dir}/{split}/{kind}/{level}/{pair_id}_{modality}.png with the manifest
    at {output_dir}/manifest.json and a flat record table at {output_dir}/records.csv. Composite
    scenarios use "kind_a+kind_b" as their kind directory. Synthesis runs records on a thread pool;
    the manifest is sorted by record key so it does not depend on scheduling.

Examples:
    >>> config = SynthConfig.from_file("configs/all_kinds.toml")
    >>> synthesizer = DatasetSynthesizer(config)
    >>> manifest = synthesizer.synthesize(discover_pairs(config.input_dir))
    >>> len(manifest.records)
    240
    >>> synthesizer.verify(manifest, config.output_dir).passed
    True
"""

import hashlib
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from datetime import datetime, timezone
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

import numpy as np
import pandas as pd

from .degrader import ImagingModel
from .exceptions import DatasetWriteError, DegradeKitError, ImageIOError, InvalidArgumentError
from .image_utils import INTENSITY_SCALE, ImageUtils
from .prompt_bank import PromptBank
from .severity import ANCHOR_LEVELS, KINDS, DegradationSpec, check_level, lookup_kind

logger = logging.getLogger(__name__)

MANIFEST_VERSION = "1.0"
MANIFEST_NAME = "manifest.json"
RECORDS_NAME = "records.csv"
THREADS_ENV = "DEGRADEKIT_THREADS"
SPLITS = ("train", "test")

EVALUATION_COMPOSITES = (
    ("low_light", "gauss_noise"),
    ("over_exposure", "low_contrast"),
    ("rain_haze", "random_noise"),
)


def _sha256(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _canonical_json(data):
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def derive_seed(global_seed, pair_id, kind, level):
    """First 8 bytes of sha256("global:pair:kind:level") as an unsigned integer."""
    digest = hashlib.sha256(f"{global_seed}:{pair_id}:{kind}:{level}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def composite_label(kinds):
    return "+".join(kinds)


@dataclass(frozen=True)
class CleanPair:
    """
    A registered clean infrared / visible pair.

    Args:
        id (str): Pair id, unique within a dataset.
        ir_path (str): Infrared PNG.
        vi_path (str): Visible PNG.
        width (int): Width in pixels, filled in once the pair is loaded.
        height (int): Height in pixels, filled in once the pair is loaded.
    """

    id: str
    ir_path: str
    vi_path: str
    width: int = None
    height: int = None

    def load(self):
        """
        Reads both images; an RGB infrared file is reduced to its luminance.

        Returns:
            tuple: (CleanPair with size set, infrared Image, visible Image).

        Raises:
            ImageIOError: If a file is missing or cannot be decoded.
            InvalidArgumentError: If the two images differ in size.
        """
        ir = ImageUtils.read_png(self.ir_path)
        vi = ImageUtils.read_png(self.vi_path)
        if not ir.is_gray:
            ir = ImageUtils.luminance(ir)
        if (ir.height, ir.width) != (vi.height, vi.width):
            raise InvalidArgumentError(
                f"Pair {self.id!r} is not registered: infrared {ir.height}x{ir.width}, visible {vi.height}x{vi.width}"
            )
        return replace(self, width=ir.width, height=ir.height), ir, vi

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def discover_pairs(root):
    """
    Scans root/ir and root/vi for PNGs and pairs them by file stem.

    Args:
        root (str): Directory holding the `ir` and `vi` subdirectories.

    Returns:
        list: CleanPair objects sorted by id. Stems present in only one directory are logged and left out.
    """
    root = Path(root)
    ir_files = {p.stem: p for p in sorted((root / "ir").glob("*.png"))}
    vi_files = {p.stem: p for p in sorted((root / "vi").glob("*.png"))}
    if not ir_files and not vi_files:
        raise ImageIOError(f"No PNG files found under {root / 'ir'} or {root / 'vi'}")
    for stem in sorted(set(ir_files) ^ set(vi_files)):
        logger.warning("Pair %r has no %s counterpart; ignored", stem, "visible" if stem in ir_files else "infrared")
    return [CleanPair(stem, str(ir_files[stem]), str(vi_files[stem])) for stem in sorted(set(ir_files) & set(vi_files))]


@dataclass(frozen=True)
class SynthConfig:
    """
    Settings of one synthesis run.

    Attributes:
        output_dir (str): Where PNGs and the manifest are written.
        input_dir (str): Directory scanned by `discover_pairs`.
        kinds (tuple): Degradation kinds of the single-degradation product.
        levels (tuple): Severity levels; the four anchors by default.
        composites (tuple): Kind pairs degraded together, one record per pair x combo x level.
        test_fraction (float): Share of pairs sent to the test split, per kind.
        global_seed (int): Root of every per-record seed.
        rephrase (bool): Pick a seeded rephrasing for each prompt instead of the canonical template.
        jitter (bool): Jitter levels when resolving parameters.
        verify_fraction (float): Share of records regenerated by `verify`.
        threads (int): Worker threads; DEGRADEKIT_THREADS or the CPU count when unset.
        sky_far (bool): Orientation of the fallback depth ramp.
        scale (float): Intensity scale the noise parameters are quoted on.
    """

    output_dir: str = "degraded_out"
    input_dir: str = None
    kinds: tuple = tuple(KINDS)
    levels: tuple = ANCHOR_LEVELS
    composites: tuple = ()
    test_fraction: float = 0.1
    global_seed: int = 0
    rephrase: bool = False
    jitter: bool = False
    verify_fraction: float = 0.25
    threads: int = None
    sky_far: bool = False
    scale: float = INTENSITY_SCALE

    def __post_init__(self):
        kinds = tuple(lookup_kind(kind).name for kind in self.kinds)
        if len(set(kinds)) != len(kinds):
            raise InvalidArgumentError(f"Duplicate kinds in config: {list(self.kinds)}")
        levels = tuple(check_level(level) for level in self.levels)
        if not levels or len(set(levels)) != len(levels):
            raise InvalidArgumentError(f"Levels must be a non-empty list without repeats. Got: {list(self.levels)}")
        composites = tuple(self._check_composite(combo) for combo in self.composites)
        if not 0.0 <= self.test_fraction <= 1.0:
            raise InvalidArgumentError(f"test_fraction must be in [0, 1]. Got: {self.test_fraction}")
        if not 0.0 <= self.verify_fraction <= 1.0:
            raise InvalidArgumentError(f"verify_fraction must be in [0, 1]. Got: {self.verify_fraction}")
        if self.threads is not None and self.threads < 1:
            raise InvalidArgumentError(f"threads must be positive. Got: {self.threads}")
        if not self.scale > 0:
            raise InvalidArgumentError(f"scale must be positive. Got: {self.scale}")
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "composites", composites)

    @staticmethod
    def _check_composite(combo):
        combo = tuple(lookup_kind(kind).name for kind in combo)
        if len(combo) != 2:
            raise InvalidArgumentError(f"A composite scenario combines exactly two kinds. Got: {list(combo)}")
        ImagingModel().plan([DegradationSpec(KINDS[kind].modality, kind, 1) for kind in combo])
        return combo

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidArgumentError(f"Unknown config keys: {sorted(unknown)}")
        data = dict(data)
        for key in ("kinds", "levels"):
            if key in data:
                data[key] = tuple(data[key])
        if "composites" in data:
            data["composites"] = tuple(tuple(combo) for combo in data["composites"])
        return cls(**data)

    @classmethod
    def from_file(cls, path):
        """
        Loads a config from a .toml or .json file; relative directories resolve against the file.

        Raises:
            InvalidArgumentError: For an unsupported suffix or invalid settings.
            OSError: If the file cannot be read.
        """
        path = Path(path)
        if path.suffix == ".toml":
            with open(path, "rb") as file:
                data = tomllib.load(file)
        elif path.suffix == ".json":
            with open(path, "r", encoding="utf-8") as file:
                data = json.load(file)
        else:
            raise InvalidArgumentError(f"Config must be a .toml or .json file. Got: {path.name}")
        for key in ("input_dir", "output_dir"):
            if data.get(key) is not None and not os.path.isabs(data[key]):
                data[key] = str(path.parent / data[key])
        return cls.from_dict(data)

    def resolve_threads(self):
        if self.threads is not None:
            return self.threads
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                return max(1, int(env))
            except ValueError:
                raise InvalidArgumentError(f"{THREADS_ENV} must be an integer. Got: {env!r}") from None
        return os.cpu_count() or 1

    def kind_labels(self):
        """Kind directories in record order: single kinds, then composite scenarios."""
        return list(self.kinds) + [composite_label(combo) for combo in self.composites]


@dataclass(frozen=True)
class ManifestRecord:
    """
    One degraded pair.

    Attributes:
        pair_id (str): Source pair.
        kind (str): Kind name, or "a+b" for a composite scenario.
        level (int): Severity level shared by every spec of the record.
        split (str): "train" or "test".
        seed (int): Per-record seed.
        specs (tuple): Resolved specs as JSON objects.
        prompt (str): Rendered prompt.
        outputs (dict): Modality -> PNG path relative to the dataset root.
        spec_hash (str): sha256 of the canonical record identity.
    """

    pair_id: str
    kind: str
    level: int
    split: str
    seed: int
    specs: tuple
    prompt: str
    outputs: dict
    spec_hash: str

    @property
    def key(self):
        return (self.pair_id, self.kind, self.level)

    @staticmethod
    def compute_hash(pair_id, kind, level, seed, specs):
        return _sha256(_canonical_json({"pair_id": pair_id, "kind": kind, "level": level, "seed": seed, "specs": list(specs)}))

    def expected_hash(self):
        return self.compute_hash(self.pair_id, self.kind, self.level, self.seed, self.specs)

    def degradation_specs(self):
        return [DegradationSpec.from_dict(spec) for spec in self.specs]

    def to_dict(self):
        data = asdict(self)
        data["specs"] = list(self.specs)
        return data

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["specs"] = tuple(data["specs"])
        return cls(**data)


@dataclass
class DatasetManifest:
    """
    Dataset metadata and records.

    `created_at` is informational and excluded from `body_hash`.
    """

    global_seed: int
    levels: list
    kinds: list
    composites: list
    test_fraction: float
    pairs: list
    records: list
    skipped: list = field(default_factory=list)
    partial: bool = False
    sky_far: bool = False
    scale: float = INTENSITY_SCALE
    version: str = MANIFEST_VERSION
    created_at: str = None

    def body(self):
        return {
            "version": self.version,
            "global_seed": self.global_seed,
            "levels": list(self.levels),
            "kinds": list(self.kinds),
            "composites": [list(combo) for combo in self.composites],
            "test_fraction": self.test_fraction,
            "pairs": [pair.to_dict() for pair in self.pairs],
            "skipped": list(self.skipped),
            "partial": self.partial,
            "sky_far": self.sky_far,
            "scale": self.scale,
            "records": [record.to_dict() for record in self.records],
        }

    def body_hash(self):
        return _sha256(_canonical_json(self.body()))

    def to_dict(self):
        return {**self.body(), "created_at": self.created_at, "body_hash": self.body_hash()}

    @classmethod
    def from_dict(cls, data):
        return cls(
            version=data.get("version", MANIFEST_VERSION),
            global_seed=data["global_seed"],
            levels=list(data["levels"]),
            kinds=list(data["kinds"]),
            composites=[tuple(combo) for combo in data.get("composites", [])],
            test_fraction=data["test_fraction"],
            pairs=[CleanPair.from_dict(pair) for pair in data["pairs"]],
            records=[ManifestRecord.from_dict(record) for record in data["records"]],
            skipped=list(data.get("skipped", [])),
            partial=data.get("partial", False),
            sky_far=data.get("sky_far", False),
            scale=data.get("scale", INTENSITY_SCALE),
            created_at=data.get("created_at"),
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8") as file:
            json.dump(self.to_dict(), file, indent=2)
        logger.info("Manifest saved to %s", path)
        return path

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as file:
            return cls.from_dict(json.load(file))

    def kind_labels(self):
        return [kind["name"] for kind in self.kinds] + [composite_label(combo) for combo in self.composites]

    def to_frame(self):
        """Flat record table: one row per record with its paths and seed."""
        rows = [
            {
                "pair_id": r.pair_id,
                "kind": r.kind,
                "level": r.level,
                "split": r.split,
                "seed": str(r.seed),
                "prompt": r.prompt,
                "infrared": r.outputs["infrared"],
                "visible": r.outputs["visible"],
                "spec_hash": r.spec_hash,
            }
            for r in self.records
        ]
        return pd.DataFrame(rows, columns=["pair_id", "kind", "level", "split", "seed", "prompt", "infrared", "visible", "spec_hash"])


@dataclass
class VerificationReport:
    """
    Outcome of `DatasetSynthesizer.verify`.

    Attributes:
        checked (int): Records whose pixels were regenerated.
        mismatches (list): {"key", "reason"} entries for records that failed a check.
        missing (list): Files referenced by the manifest that do not exist.
        count_ok (bool): Record count matches pairs x kinds x levels.
        split_ok (bool): Every kind sends the expected number of pairs to the test split.
    """

    checked: int = 0
    mismatches: list = field(default_factory=list)
    missing: list = field(default_factory=list)
    count_ok: bool = True
    split_ok: bool = True

    @property
    def passed(self):
        return self.count_ok and self.split_ok and not self.mismatches and not self.missing

    def flag(self, record, reason):
        self.mismatches.append({"key": "/".join(map(str, record.key)), "reason": reason})

    def to_dict(self):
        return {**asdict(self), "passed": self.passed}


class DatasetSynthesizer:
    """
    Synthesizes and verifies degraded datasets.
    """

    def __init__(self, config=None, bank=None):
        """
        Initializes the synthesizer.

        Args:
            config (SynthConfig): Synthesis settings.
            bank (PromptBank): Prompt bank; the packaged one by default.
        """
        self.config = config or SynthConfig()
        self.bank = bank or PromptBank.default()
        self.model = ImagingModel(scale=self.config.scale, sky_far=self.config.sky_far)

    @staticmethod
    def expected_test_count(n_pairs, test_fraction):
        return int(math.floor(test_fraction * n_pairs + 0.5))

    @staticmethod
    def assign_splits(pair_ids, kind, test_fraction, global_seed):
        """Per-kind split: pairs ranked by a hash of (seed, pair, kind), the first ones go to test."""
        ranked = sorted(pair_ids, key=lambda pid: (_sha256(f"{global_seed}:{pid}:{kind}:split"), pid))
        n_test = DatasetSynthesizer.expected_test_count(len(ranked), test_fraction)
        return {pid: ("test" if i < n_test else "train") for i, pid in enumerate(ranked)}

    def plan_specs(self, pair_id, label, level):
        """Resolved specs of one record and the record seed."""
        config = self.config
        seed = derive_seed(config.global_seed, pair_id, label, level)
        members = label.split("+")
        specs = []
        for index, kind in enumerate(members):
            spec_seed = seed if len(members) == 1 else derive_seed(config.global_seed, pair_id, f"{label}#{index}", level)
            spec = DegradationSpec(KINDS[kind].modality, kind, level, seed=spec_seed)
            specs.append(spec.resolved(jitter=config.jitter))
        return seed, specs

    def build_plan(self, pairs):
        """All records to produce, sorted by key, with seeds checked for collisions."""
        config = self.config
        pair_ids = [pair.id for pair in pairs]
        plan = []
        seen = {}
        for label in config.kind_labels():
            splits = self.assign_splits(pair_ids, label, config.test_fraction, config.global_seed)
            for pair_id in pair_ids:
                for level in config.levels:
                    seed, specs = self.plan_specs(pair_id, label, level)
                    for spec in specs:
                        other = seen.setdefault(spec.seed, (pair_id, label, level))
                        if other != (pair_id, label, level):
                            raise InvalidArgumentError(
                                f"Seed collision between {other} and {(pair_id, label, level)}; choose another global_seed."
                            )
                    plan.append((pair_id, label, level, splits[pair_id], seed, specs))
        plan.sort(key=lambda item: item[:3])
        return plan

    def render(self, specs, seed):
        return self.bank.render_prompt(specs, seed=seed if self.config.rephrase else None)

    @staticmethod
    def output_paths(split, label, level, pair_id):
        base = Path(split) / label / str(level)
        return {"infrared": str(base / f"{pair_id}_infrared.png"), "visible": str(base / f"{pair_id}_visible.png")}

    def synthesize(self, pairs):
        """
        Builds the dataset.

        Args:
            pairs (list): CleanPair objects (see `discover_pairs`).

        Returns:
            DatasetManifest: The saved manifest.

        Raises:
            InvalidArgumentError: If `pairs` is empty.
            DatasetWriteError: If an output cannot be written; carries the partial manifest.
        """
        if not pairs:
            raise InvalidArgumentError("No clean pairs to synthesize from.")
        config = self.config
        out_dir = Path(config.output_dir)

        loaded, images, skipped = [], {}, []
        for pair in sorted(pairs, key=lambda p: p.id):
            try:
                pair, ir, vi = pair.load()
            except (ImageIOError, InvalidArgumentError) as e:
                logger.warning("Skipping pair %r: %s", pair.id, e)
                skipped.append({"pair_id": pair.id, "reason": str(e)})
                continue
            loaded.append(pair)
            images[pair.id] = (ir, vi)

        plan = self.build_plan(loaded)
        logger.info("Synthesizing %d records from %d pairs (%d skipped)", len(plan), len(loaded), len(skipped))

        def run(item):
            pair_id, label, level, split, seed, specs = item
            ir, vi = images[pair_id]
            ir_out, vi_out = self.model.compose(ir, vi, specs)
            outputs = self.output_paths(split, label, level, pair_id)
            ImageUtils.write_png(ir_out, str(out_dir / outputs["infrared"]))
            ImageUtils.write_png(vi_out, str(out_dir / outputs["visible"]))
            spec_dicts = tuple(spec.to_dict() for spec in specs)
            return ManifestRecord(
                pair_id=pair_id,
                kind=label,
                level=level,
                split=split,
                seed=seed,
                specs=spec_dicts,
                prompt=self.render(specs, seed),
                outputs=outputs,
                spec_hash=ManifestRecord.compute_hash(pair_id, label, level, seed, spec_dicts),
            )

        records, failures = [], []
        with ThreadPoolExecutor(max_workers=config.resolve_threads()) as pool:
            futures = [(item, pool.submit(run, item)) for item in plan]
            for done, (item, future) in enumerate(futures, start=1):
                try:
                    records.append(future.result())
                except (ImageIOError, OSError) as e:
                    failures.append((item[:3], e))
                if done % 100 == 0:
                    logger.info("%d / %d records", done, len(plan))
        records.sort(key=lambda record: record.key)

        manifest = DatasetManifest(
            global_seed=config.global_seed,
            levels=list(config.levels),
            kinds=[self.kind_snapshot(KINDS[kind]) for kind in config.kinds],
            composites=[list(combo) for combo in config.composites],
            test_fraction=config.test_fraction,
            pairs=loaded,
            records=records,
            skipped=skipped,
            partial=bool(failures),
            sky_far=config.sky_far,
            scale=config.scale,
            created_at=datetime.now(timezone.utc).isoformat(),
        )

        if failures:
            key, error = failures[0]
            try:
                out_dir.mkdir(parents=True, exist_ok=True)
                manifest.save(out_dir / MANIFEST_NAME)
            except OSError as e:
                logger.error("Could not save the partial manifest: %s", e)
            raise DatasetWriteError(
                f"Failed to write {len(failures)} of {len(plan)} records (first: {'/'.join(map(str, key))}: {error})",
                manifest=manifest,
            )

        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            manifest.save(out_dir / MANIFEST_NAME)
            manifest.to_frame().to_csv(out_dir / RECORDS_NAME, index=False)
        except OSError as e:
            manifest.partial = True
            raise DatasetWriteError(f"Failed to write the manifest to {out_dir}: {e}", manifest=manifest) from e
        logger.info("Dataset written to %s: %d records, %d pairs skipped", out_dir, len(records), len(skipped))
        return manifest

    @staticmethod
    def kind_snapshot(kind):
        return {
            "name": kind.name,
            "modality": kind.modality.value,
            "families": [family.value for family in kind.families],
            "display_name": kind.display_name,
        }

    def verify(self, manifest, root, fraction=None, seed=0):
        """
        Re-derives a manifest.

        Every record's seed, spec hash and output files are checked; a seeded sample of records is regenerated
        and compared with the stored PNGs after 8-bit quantization.

        Args:
            manifest (DatasetManifest): The manifest to check.
            root (str): Dataset root the record paths are relative to.
            fraction (float): Share of records regenerated; the config's verify_fraction by default.
            seed (int): Seed of the sample.

        Returns:
            VerificationReport: What passed and what did not.
        """
        fraction = self.config.verify_fraction if fraction is None else fraction
        if not 0.0 <= fraction <= 1.0:
            raise InvalidArgumentError(f"fraction must be in [0, 1]. Got: {fraction}")
        root = Path(root)
        report = VerificationReport()
        labels = manifest.kind_labels()
        pair_ids = [pair.id for pair in manifest.pairs]

        expected = len(pair_ids) * len(labels) * len(manifest.levels)
        if not manifest.partial and len(manifest.records) != expected:
            report.count_ok = False
            logger.warning("Manifest has %d records, expected %d", len(manifest.records), expected)

        n_test = self.expected_test_count(len(pair_ids), manifest.test_fraction)
        for label in labels:
            test_pairs = {r.pair_id for r in manifest.records if r.kind == label and r.split == "test"}
            if not manifest.partial and len(test_pairs) != n_test:
                report.split_ok = False
                logger.warning("Kind %s has %d test pairs, expected %d", label, len(test_pairs), n_test)

        for record in manifest.records:
            if record.split not in SPLITS:
                report.flag(record, f"unknown split {record.split!r}")
            elif record.spec_hash != record.expected_hash():
                report.flag(record, "spec-hash mismatch")
            elif record.seed != derive_seed(manifest.global_seed, record.pair_id, record.kind, record.level):
                report.flag(record, "seed does not match its derivation")

        for record in manifest.records:
            for modality in ("infrared", "visible"):
                path = root / record.outputs[modality]
                if not path.exists():
                    report.missing.append(str(path))

        flagged = {m["key"] for m in report.mismatches}
        candidates = [r for r in manifest.records if "/".join(map(str, r.key)) not in flagged]
        n_sample = int(math.ceil(fraction * len(candidates)))
        order = np.random.default_rng(seed).permutation(len(candidates))[:n_sample]
        sample = [candidates[i] for i in sorted(order)]

        pairs = {pair.id: pair for pair in manifest.pairs}
        model = ImagingModel(scale=manifest.scale, sky_far=manifest.sky_far)
        sources = {}
        for record in sample:
            if record.pair_id not in sources:
                try:
                    sources[record.pair_id] = pairs[record.pair_id].load()[1:]
                except (KeyError, DegradeKitError) as e:
                    report.flag(record, f"source pair unavailable: {e}")
                    continue
            ir, vi = sources[record.pair_id]
            ir_out, vi_out = model.compose(ir, vi, record.degradation_specs())
            report.checked += 1
            for modality, regenerated in (("infrared", ir_out), ("visible", vi_out)):
                path = root / record.outputs[modality]
                if not path.exists():
                    continue
                try:
                    stored = ImageUtils.to_uint8(ImageUtils.read_png(str(path)))
                except ImageIOError as e:
                    report.flag(record, f"{modality} output unreadable: {e}")
                    continue
                if stored.shape != regenerated.shape or not np.array_equal(stored, ImageUtils.to_uint8(regenerated)):
                    report.flag(record, f"{modality} pixels differ from regeneration")

        logger.info(
            "Verified %d of %d records: %d mismatches, %d missing files",
            report.checked, len(manifest.records), len(report.mismatches), len(report.missing),
        )
        return report
