# prompt_bank.py

"""
This module defines the `PromptBank` class, which renders degradation specs into text prompts and
parses such prompts back into specs. Every prompt names the affected modality, the degradation type
and its severity grade, e.g.:

    We are performing infrared and visible image fusion, where the visible modality suffers from a grade-4 rain.

The bank is built from a versioned JSON resource (`resources/template_bank.json`) of sentence
openers and clause bodies; their product gives more than a hundred distinct templates in three
arities.

Classes:
    PromptTemplate: One template (id, pattern with slots, arity) and its compiled matcher.
    PromptBank: The loaded bank with render / parse operations.

Methods:
    PromptBank.default(): The bank shipped with the package, loaded once.
    template_bank(): All templates, in a stable order.
    get(template_id): Look up one template.
    render_prompt(specs, template_id=None, seed=None): Canonical text, a chosen template, or a seeded rephrasing.
    parse_prompt(text): Recover (modality, kind, level) for each clause.
    nearest_template(text): The template whose text is closest to `text`, for diagnostics.

Usage:
    Matching is case-insensitive and tolerant to runs of whitespace. Text that fits no template is
    rejected with a PromptParseError naming the nearest template; there is no fuzzy interpretation.

Examples:
    >>> bank = PromptBank.default()
    >>> specs = [DegradationSpec("visible", "low_light", 6), DegradationSpec("infrared", "stripe_noise", 8)]
    >>> bank.render_prompt(specs)
    'We are performing infrared and visible image fusion. Please handle a grade-6 low-light in the visible modality, and a grade-8 stripe noise in the infrared modality.'
    >>> [(s.kind, s.level) for s in bank.parse_prompt(bank.render_prompt(specs))]
    [('low_light', 6), ('stripe_noise', 8)]
"""

import difflib
import json
import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from .exceptions import InvalidArgumentError, PromptParseError, UnsupportedArityError
from .severity import SEVERITY_ANCHORS, DegradationSpec, check_level, lookup_kind

logger = logging.getLogger(__name__)

SINGLE = "single"
COMPOSITE_TWO = "composite-two"
COMPOSITE_SAME_MODALITY = "composite-same-modality"
ARITIES = (SINGLE, COMPOSITE_TWO, COMPOSITE_SAME_MODALITY)

CANONICAL_TEMPLATES = {
    SINGLE: "single/perform/suffers",
    COMPOSITE_TWO: "composite-two/perform/handle",
    COMPOSITE_SAME_MODALITY: "composite-same-modality/perform/address",
}

# Slots a pattern of each arity must contain, each exactly once.
ARITY_SLOTS = {
    SINGLE: ("modality", "severity", "kind"),
    COMPOSITE_TWO: ("modality_a", "severity_a", "kind_a", "modality_b", "severity_b", "kind_b"),
    COMPOSITE_SAME_MODALITY: ("modality", "severity", "kind_a", "kind_b"),
}

SLOT_RE = re.compile(r"\{(\w+)\}")
SLOT_PATTERNS = {
    "modality": r"infrared|visible",
    "severity": r"[+-]?\d+",
    "kind": r"[a-z][a-z\- ]*?",
}


def _normalize_text(text):
    return " ".join(str(text).split())


def _slot_regex(name):
    base = name.split("_")[0]
    return f"(?P<{name}>{SLOT_PATTERNS[base]})"


def _compile(pattern):
    parts = []
    position = 0
    for match in SLOT_RE.finditer(pattern):
        literal = pattern[position:match.start()]
        parts.append(r"\s+".join(re.escape(word) for word in literal.split(" ")))
        parts.append(_slot_regex(match.group(1)))
        position = match.end()
    literal = pattern[position:]
    parts.append(r"\s+".join(re.escape(word) for word in literal.split(" ")))
    return re.compile("".join(parts), re.IGNORECASE)


@dataclass(frozen=True)
class PromptTemplate:
    """
    A prompt template.

    Attributes:
        id (str): Unique id, "<arity>/<opener>/<body>".
        pattern (str): Text with {modality} / {severity} / {kind} slots (suffixed _a / _b in pairs).
        arity (str): "single", "composite-two" or "composite-same-modality".
    """

    id: str
    pattern: str
    arity: str
    matcher: re.Pattern = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.arity not in ARITIES:
            raise InvalidArgumentError(f"Unknown template arity: {self.arity!r}")
        slots = SLOT_RE.findall(self.pattern)
        if sorted(slots) != sorted(ARITY_SLOTS[self.arity]):
            raise InvalidArgumentError(f"Template {self.id!r} must use the slots {ARITY_SLOTS[self.arity]} exactly once. Got: {slots}")
        object.__setattr__(self, "matcher", _compile(self.pattern))

    def render(self, specs):
        if self.arity == SINGLE:
            (spec,) = specs
            values = {"modality": spec.modality.value, "severity": spec.level, "kind": spec.kind_info.display_name}
        elif self.arity == COMPOSITE_TWO:
            a, b = specs
            values = {
                "modality_a": a.modality.value,
                "severity_a": a.level,
                "kind_a": a.kind_info.display_name,
                "modality_b": b.modality.value,
                "severity_b": b.level,
                "kind_b": b.kind_info.display_name,
            }
        else:
            a, b = specs
            values = {
                "modality": a.modality.value,
                "severity": a.level,
                "kind_a": a.kind_info.display_name,
                "kind_b": b.kind_info.display_name,
            }
        return self.pattern.format(**values)

    def accepts(self, specs):
        """Whether this template can describe `specs` exactly."""
        if self.arity == SINGLE:
            return len(specs) == 1
        if len(specs) != 2:
            return False
        if self.arity == COMPOSITE_SAME_MODALITY:
            a, b = specs
            return a.modality == b.modality and a.level == b.level
        return True

    def match(self, text):
        """Return the slot values if `text` fits this template, otherwise None."""
        found = self.matcher.fullmatch(_normalize_text(text))
        if found is None:
            return None
        return {key: value.lower() for key, value in found.groupdict().items()}

    def extract(self, values):
        """Turn matched slot values into specs (params unresolved, seed 0)."""

        def level(raw):
            return check_level(int(raw))

        if self.arity == SINGLE:
            clauses = [(values["modality"], values["kind"], values["severity"])]
        elif self.arity == COMPOSITE_TWO:
            clauses = [
                (values["modality_a"], values["kind_a"], values["severity_a"]),
                (values["modality_b"], values["kind_b"], values["severity_b"]),
            ]
        else:
            clauses = [
                (values["modality"], values["kind_a"], values["severity"]),
                (values["modality"], values["kind_b"], values["severity"]),
            ]
        return [
            DegradationSpec(modality=modality, kind=lookup_kind(kind).name, level=level(severity))
            for modality, kind, severity in clauses
        ]


class PromptBank:
    """
    A bank of prompt templates built from openers and clause bodies.
    """

    severity_anchors = SEVERITY_ANCHORS

    def __init__(self, templates, version="unversioned"):
        """
        Initializes the bank.

        Args:
            templates (list): PromptTemplate objects with unique ids.
            version (str): Version string of the resource the bank came from.
        """
        self.version = version
        self.templates = list(templates)
        self._by_id = {}
        for template in self.templates:
            if template.id in self._by_id:
                raise InvalidArgumentError(f"Duplicate template id: {template.id!r}")
            self._by_id[template.id] = template

    @classmethod
    def from_dict(cls, data):
        templates = []
        for arity in ARITIES:
            for body in data["bodies"].get(arity, []):
                for opener in data["openers"]:
                    templates.append(
                        PromptTemplate(
                            id=f"{arity}/{opener['id']}/{body['id']}",
                            pattern=opener["text"] + body["text"],
                            arity=arity,
                        )
                    )
        return cls(templates, version=data.get("version", "unversioned"))

    @classmethod
    def from_json(cls, path):
        with open(path, "r", encoding="utf-8") as file:
            return cls.from_dict(json.load(file))

    @classmethod
    @lru_cache(maxsize=None)
    def default(cls):
        """The bank shipped with the package."""
        resource = resources.files("degradekit").joinpath("resources", "template_bank.json")
        bank = cls.from_dict(json.loads(resource.read_text(encoding="utf-8")))
        logger.debug("Loaded prompt bank v%s with %d templates", bank.version, len(bank.templates))
        return bank

    def template_bank(self):
        return list(self.templates)

    def get(self, template_id):
        try:
            return self._by_id[template_id]
        except KeyError:
            raise KeyError(f"Unknown template id: {template_id!r}") from None

    def render_prompt(self, specs, template_id=None, seed=None):
        """
        Renders specs as a prompt.

        Args:
            specs (list): One or two DegradationSpecs.
            template_id (str): Use this template. Takes precedence over `seed`.
            seed (int): Pick a template from the eligible rephrasings with this seed.
                With neither, the canonical template of the arity is used.

        Returns:
            str: The prompt text.

        Raises:
            UnsupportedArityError: If there are zero or more than two specs, or the chosen
                template cannot describe them.
        """
        specs = list(specs)
        if not 1 <= len(specs) <= 2:
            raise UnsupportedArityError(f"Prompts describe one or two degradations. Got {len(specs)}.")
        if template_id is not None:
            template = self.get(template_id)
            if not template.accepts(specs):
                raise UnsupportedArityError(f"Template {template_id!r} ({template.arity}) cannot describe these specs.")
        elif seed is None:
            template = self.get(CANONICAL_TEMPLATES[SINGLE if len(specs) == 1 else COMPOSITE_TWO])
        else:
            eligible = [template for template in self.templates if template.accepts(specs)]
            template = eligible[int(np.random.default_rng(seed).integers(len(eligible)))]
        return template.render(specs)

    def parse_prompt(self, text):
        """
        Parses a prompt back into specs.

        Args:
            text (str): Prompt text matching one of the bank's templates.

        Returns:
            list: DegradationSpecs with modality, kind and level set; params unresolved.

        Raises:
            PromptParseError: If no template matches; carries the nearest template.
            UnknownKindError: If a clause names an unregistered degradation.
            LevelOutOfRangeError: If a grade is outside 1..10.
        """
        for template in self.templates:
            values = template.match(text)
            if values is not None:
                return template.extract(values)
        nearest = self.nearest_template(text)
        raise PromptParseError(
            f"Prompt does not match any template. Nearest template: {nearest.pattern!r} ({nearest.id})",
            nearest_template=nearest.pattern,
        )

    def nearest_template(self, text):
        normalized = _normalize_text(text).lower()

        def score(template):
            return difflib.SequenceMatcher(None, normalized, template.pattern.lower()).ratio()

        return max(self.templates, key=score)
