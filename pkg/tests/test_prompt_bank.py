# test_prompt_bank.py

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degradekit.exceptions import (
    InvalidArgumentError,
    LevelOutOfRangeError,
    PromptParseError,
    UnknownKindError,
    UnsupportedArityError,
)
from degradekit.prompt_bank import CANONICAL_TEMPLATES, PromptBank, PromptTemplate
from degradekit.severity import KINDS, DegradationSpec, Modality

BANK = PromptBank.default()

CANONICAL_PAIR = (
    "We are performing infrared and visible image fusion. Please handle a grade-6 low-light in the visible "
    "modality, and a grade-8 stripe noise in the infrared modality."
)
CANONICAL_SINGLE = "We are performing infrared and visible image fusion, where the visible modality suffers from a grade-4 rain."


def identity(specs):
    return [(spec.modality, spec.kind, spec.level) for spec in specs]


specs_strategy = st.builds(
    lambda kind, level: DegradationSpec(KINDS[kind].modality, kind, level),
    st.sampled_from(sorted(KINDS)),
    st.integers(min_value=1, max_value=10),
)


@st.composite
def same_modality_pairs(draw):
    modality = draw(st.sampled_from(list(Modality)))
    names = sorted(name for name, kind in KINDS.items() if kind.modality is modality)
    level = draw(st.integers(min_value=1, max_value=10))
    a = draw(st.sampled_from(names))
    b = draw(st.sampled_from(names))
    return [DegradationSpec(modality, a, level), DegradationSpec(modality, b, level)]


def specs_for(template):
    if template.arity == "single":
        return [DegradationSpec("visible", "rain", 4)]
    if template.arity == "composite-two":
        return [DegradationSpec("visible", "low_light", 6), DegradationSpec("infrared", "stripe_noise", 8)]
    return [DegradationSpec("visible", "low_light_noise", 3), DegradationSpec("visible", "haze", 3)]


def test_canonical_pair_text(bank):
    specs = [DegradationSpec("visible", "low_light", 6), DegradationSpec("infrared", "stripe_noise", 8)]
    rendered = bank.render_prompt(specs)
    assert rendered == CANONICAL_PAIR, f"Expected {CANONICAL_PAIR!r}, got {rendered!r}"
    assert identity(bank.parse_prompt(rendered)) == identity(specs)


def test_canonical_single_text(bank):
    rendered = bank.render_prompt([DegradationSpec("visible", "rain", 4)])
    assert rendered == CANONICAL_SINGLE, f"Expected {CANONICAL_SINGLE!r}, got {rendered!r}"


def test_bank_size_and_ids(bank):
    templates = bank.template_bank()
    ids = [t.id for t in templates]
    assert len(templates) >= 100, f"Expected at least 100 templates, got {len(templates)}"
    assert len(set(ids)) == len(ids)
    assert len({t.pattern for t in templates}) == len(templates)
    assert {t.arity for t in templates} == {"single", "composite-two", "composite-same-modality"}
    for template_id in CANONICAL_TEMPLATES.values():
        bank.get(template_id)


def test_every_template_round_trips(bank):
    for template in bank.template_bank():
        specs = specs_for(template)
        text = bank.render_prompt(specs, template_id=template.id)
        assert identity(bank.parse_prompt(text)) == identity(specs), f"Template {template.id} failed: {text!r}"


@settings(max_examples=200, deadline=None)
@given(specs=st.lists(specs_strategy, min_size=1, max_size=2), seed=st.integers(min_value=0, max_value=2**32))
def test_seeded_round_trip(specs, seed):
    text = BANK.render_prompt(specs, seed=seed)
    assert identity(BANK.parse_prompt(text)) == identity(specs)
    assert BANK.render_prompt(specs, seed=seed) == text


@settings(max_examples=100, deadline=None)
@given(specs=same_modality_pairs(), index=st.integers(min_value=0, max_value=23))
def test_shared_level_round_trip(specs, index):
    shared = [t for t in BANK.template_bank() if t.arity == "composite-same-modality"]
    template = shared[index % len(shared)]
    text = BANK.render_prompt(specs, template_id=template.id)
    assert identity(BANK.parse_prompt(text)) == identity(specs)


@settings(max_examples=100, deadline=None)
@given(spec=specs_strategy, seed=st.integers(min_value=0, max_value=1000), upper=st.booleans())
def test_case_and_whitespace_variants(spec, seed, upper):
    text = BANK.render_prompt([spec], seed=seed)
    variant = "  " + "   ".join(text.split(" ")) + "\n"
    variant = variant.upper() if upper else variant.title()
    assert identity(BANK.parse_prompt(variant)) == identity([spec])


def test_level_out_of_range(bank):
    text = CANONICAL_SINGLE.replace("grade-4", "grade-11")
    with pytest.raises(LevelOutOfRangeError):
        bank.parse_prompt(text)
    with pytest.raises(LevelOutOfRangeError):
        bank.parse_prompt(CANONICAL_SINGLE.replace("grade-4", "grade-0"))


def test_unknown_kind(bank):
    with pytest.raises(UnknownKindError):
        bank.parse_prompt(CANONICAL_SINGLE.replace("rain", "snow"))


def test_synonyms_parse(bank):
    specs = bank.parse_prompt(CANONICAL_SINGLE.replace("rain", "low light").replace("grade-4", "grade-2"))
    assert identity(specs) == [(Modality.VISIBLE, "low_light", 2)]


def test_unmatched_text_reports_nearest_template(bank):
    with pytest.raises(PromptParseError) as info:
        bank.parse_prompt("We are performing infrared and visible image fusion, where the visible modality has rain.")
    assert info.value.nearest_template is not None
    assert "{modality}" in info.value.nearest_template


def test_arity_limits(bank):
    three = [DegradationSpec("visible", "rain", 1), DegradationSpec("visible", "low_light", 1), DegradationSpec("infrared", "random_noise", 1)]
    with pytest.raises(UnsupportedArityError):
        bank.render_prompt(three)
    with pytest.raises(UnsupportedArityError):
        bank.render_prompt([])
    mixed_levels = [DegradationSpec("visible", "rain", 2), DegradationSpec("visible", "low_light", 5)]
    with pytest.raises(UnsupportedArityError):
        bank.render_prompt(mixed_levels, template_id=CANONICAL_TEMPLATES["composite-same-modality"])


def test_parsed_specs_are_unresolved(bank):
    spec = bank.parse_prompt(CANONICAL_SINGLE)[0]
    assert spec.params is None and spec.seed == 0


def test_template_validation_errors(bank):
    with pytest.raises(InvalidArgumentError):
        PromptTemplate("single/x/y", "The {modality} modality suffers from {kind}.", "triple")
    with pytest.raises(InvalidArgumentError):
        PromptTemplate("single/x/y", "The {modality} modality suffers from {kind}.", "single")
    template = bank.get("single/perform/suffers")
    with pytest.raises(InvalidArgumentError):
        PromptBank([template, template])
