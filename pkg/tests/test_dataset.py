# test_dataset.py

import json
import os
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from degradekit.dataset import (
    EVALUATION_COMPOSITES,
    MANIFEST_NAME,
    RECORDS_NAME,
    DatasetManifest,
    DatasetSynthesizer,
    SynthConfig,
    derive_seed,
    discover_pairs,
)
from degradekit.exceptions import DatasetWriteError, ImageIOError, InvalidArgumentError, UnknownKindError
from degradekit.image_utils import Image, ImageUtils


@pytest.fixture
def manifest(synth_config, pair_dir):
    return DatasetSynthesizer(synth_config).synthesize(discover_pairs(pair_dir))


def test_discover_pairs(pair_dir, caplog):
    ImageUtils.write_png(Image.constant(16, 16, 0.5), os.path.join(pair_dir, "ir", "orphan.png"))
    pairs = discover_pairs(pair_dir)
    assert [pair.id for pair in pairs] == [f"pair{i:02d}" for i in range(5)]
    assert "orphan" in caplog.text


def test_discover_pairs_empty(tmp_path):
    with pytest.raises(ImageIOError):
        discover_pairs(tmp_path)


def test_derive_seed_is_stable():
    seed = derive_seed(0, "pair00", "haze", 4)
    assert seed == derive_seed(0, "pair00", "haze", 4)
    assert 0 <= seed < 2 ** 64
    assert seed != derive_seed(1, "pair00", "haze", 4)
    assert seed != derive_seed(0, "pair00", "haze", 7)


def test_synthesize_record_count(manifest, synth_config):
    assert len(manifest.records) == 240, f"Expected 5 x 12 x 4 = 240 records, got {len(manifest.records)}"
    assert not manifest.partial and manifest.skipped == []
    keys = [record.key for record in manifest.records]
    assert keys == sorted(keys)
    out = synth_config.output_dir
    assert os.path.exists(os.path.join(out, MANIFEST_NAME))
    frame = pd.read_csv(os.path.join(out, RECORDS_NAME))
    assert len(frame) == 240


def test_output_layout(manifest, synth_config):
    record = next(r for r in manifest.records if r.kind == "haze" and r.level == 7)
    expected = f"{record.split}/haze/7/{record.pair_id}_visible.png"
    assert record.outputs["visible"] == expected, f"Expected {expected}, got {record.outputs['visible']}"
    for r in manifest.records:
        for path in r.outputs.values():
            assert os.path.exists(os.path.join(synth_config.output_dir, path))
    ir = ImageUtils.read_png(os.path.join(synth_config.output_dir, record.outputs["infrared"]))
    assert ir.is_gray


def test_split_counts(manifest):
    for kind in manifest.kind_labels():
        test_pairs = {r.pair_id for r in manifest.records if r.kind == kind and r.split == "test"}
        assert len(test_pairs) == 1, f"Kind {kind} has {len(test_pairs)} test pairs"
        for pair_id in test_pairs:
            assert all(r.split == "test" for r in manifest.records if r.kind == kind and r.pair_id == pair_id)


def test_record_seeds_and_prompts(manifest, bank):
    for record in manifest.records[:24]:
        assert record.seed == derive_seed(0, record.pair_id, record.kind, record.level)
        assert record.spec_hash == record.expected_hash()
        parsed = bank.parse_prompt(record.prompt)
        assert [(s.kind, s.level) for s in parsed] == [(s.kind, s.level) for s in record.degradation_specs()]


def test_synthesis_is_reproducible(synth_config, pair_dir, tmp_path, manifest):
    config = replace(synth_config, output_dir=str(tmp_path / "again"), threads=1)
    again = DatasetSynthesizer(config).synthesize(discover_pairs(pair_dir))
    assert again.body_hash() == manifest.body_hash()
    first = os.path.join(synth_config.output_dir, manifest.records[17].outputs["visible"])
    second = os.path.join(config.output_dir, again.records[17].outputs["visible"])
    assert np.array_equal(ImageUtils.to_uint8(ImageUtils.read_png(first)), ImageUtils.to_uint8(ImageUtils.read_png(second)))


def test_verify_passes_on_fresh_dataset(manifest, synth_config):
    synthesizer = DatasetSynthesizer(synth_config)
    loaded = DatasetManifest.load(os.path.join(synth_config.output_dir, MANIFEST_NAME))
    assert loaded.body_hash() == manifest.body_hash()
    report = synthesizer.verify(loaded, synth_config.output_dir, fraction=1.0)
    assert report.passed, f"Expected a clean report, got {report.to_dict()}"
    assert report.checked == 240


def test_verify_flags_corrupted_png(manifest, synth_config):
    record = manifest.records[42]
    path = os.path.join(synth_config.output_dir, record.outputs["visible"])
    ImageUtils.write_png(Image.constant(16, 16, 0.0, channels=3), path)
    report = DatasetSynthesizer(synth_config).verify(manifest, synth_config.output_dir, fraction=1.0)
    assert not report.passed
    assert [m["key"] for m in report.mismatches] == ["/".join(map(str, record.key))]


def test_verify_flags_edited_level(manifest, synth_config):
    path = os.path.join(synth_config.output_dir, MANIFEST_NAME)
    with open(path) as file:
        data = json.load(file)
    original = data["records"][5]["level"]
    data["records"][5]["level"] = 10 if original != 10 else 1
    edited = DatasetManifest.from_dict(data)
    report = DatasetSynthesizer(synth_config).verify(edited, synth_config.output_dir, fraction=0.0)
    assert [m["reason"] for m in report.mismatches] == ["spec-hash mismatch"]


def test_verify_reports_missing_files(manifest, synth_config):
    record = manifest.records[0]
    os.remove(os.path.join(synth_config.output_dir, record.outputs["infrared"]))
    report = DatasetSynthesizer(synth_config).verify(manifest, synth_config.output_dir, fraction=1.0)
    assert len(report.missing) == 1 and not report.passed


def test_verify_reports_missing_files_outside_sample(manifest, synth_config):
    record = manifest.records[-1]
    path = os.path.join(synth_config.output_dir, record.outputs["visible"])
    os.remove(path)
    report = DatasetSynthesizer(synth_config).verify(manifest, synth_config.output_dir, fraction=0.0)
    assert report.checked == 0
    assert report.missing == [path], f"Expected the deleted file to be listed, got {report.missing}"
    assert not report.passed


def test_verify_at_custom_scale(synth_config, pair_dir):
    config = replace(synth_config, scale=100.0, kinds=("gauss_noise", "stripe_noise"), levels=(7,))
    DatasetSynthesizer(config).synthesize(discover_pairs(pair_dir))
    path = os.path.join(config.output_dir, MANIFEST_NAME)
    loaded = DatasetManifest.load(path)
    assert loaded.scale == 100.0
    report = DatasetSynthesizer().verify(loaded, config.output_dir, fraction=1.0)
    assert report.passed and report.checked == 10, f"Expected a clean report, got {report.to_dict()}"

    with open(path) as file:
        data = json.load(file)
    data["scale"] = 255.0
    edited = DatasetManifest.from_dict(data)
    assert edited.body_hash() != loaded.body_hash()
    report = DatasetSynthesizer().verify(edited, config.output_dir, fraction=1.0)
    assert not report.passed and report.mismatches


def test_config_rejects_non_positive_scale():
    with pytest.raises(InvalidArgumentError):
        SynthConfig(scale=0)


def test_composite_scenarios(synth_config, pair_dir):
    config = replace(synth_config, kinds=("haze", "stripe_noise"), levels=(1, 10), composites=EVALUATION_COMPOSITES)
    manifest = DatasetSynthesizer(config).synthesize(discover_pairs(pair_dir))
    assert len(manifest.records) == 5 * (2 + 3) * 2
    composite = [r for r in manifest.records if r.kind == "low_light+gauss_noise"]
    assert len(composite) == 10 and all(len(r.specs) == 2 for r in composite)
    assert os.path.exists(os.path.join(config.output_dir, composite[0].outputs["visible"]))
    assert DatasetSynthesizer(config).verify(manifest, config.output_dir, fraction=0.2).passed


def test_unreadable_pair_is_skipped(synth_config, pair_dir):
    for modality in ("ir", "vi"):
        with open(os.path.join(pair_dir, modality, "broken.png"), "wb") as file:
            file.write(b"not a png")
    config = replace(synth_config, kinds=("rain",), levels=(4,))
    manifest = DatasetSynthesizer(config).synthesize(discover_pairs(pair_dir))
    assert len(manifest.records) == 5
    assert [entry["pair_id"] for entry in manifest.skipped] == ["broken"]


def test_write_failure_keeps_partial_manifest(synth_config, pair_dir, tmp_path):
    blocker = tmp_path / "blocked"
    blocker.write_text("a file, not a directory")
    config = replace(synth_config, output_dir=str(blocker), kinds=("rain",), levels=(4,))
    with pytest.raises(DatasetWriteError) as info:
        DatasetSynthesizer(config).synthesize(discover_pairs(pair_dir))
    assert info.value.manifest is not None and info.value.manifest.partial


def test_synthesize_without_pairs(synth_config):
    with pytest.raises(InvalidArgumentError):
        DatasetSynthesizer(synth_config).synthesize([])


def test_config_validation():
    with pytest.raises(UnknownKindError):
        SynthConfig(kinds=("haze", "snow"))
    with pytest.raises(InvalidArgumentError):
        SynthConfig(levels=(1, 1))
    with pytest.raises(InvalidArgumentError):
        SynthConfig(composites=(("rain", "haze"),))
    with pytest.raises(InvalidArgumentError):
        SynthConfig.from_dict({"kinds": ["haze"], "colour": "red"})
    assert SynthConfig(kinds=("Low Light",)).kinds == ("low_light",)


def test_config_files(tmp_path):
    toml_path = tmp_path / "run.toml"
    toml_path.write_text('output_dir = "out"\nkinds = ["haze", "rain"]\nlevels = [2, 9]\ncomposites = [["low_light", "gauss_noise"]]\n')
    config = SynthConfig.from_file(str(toml_path))
    assert config.output_dir == str(tmp_path / "out")
    assert config.kind_labels() == ["haze", "rain", "low_light+gauss_noise"]
    json_path = tmp_path / "run.json"
    json_path.write_text(json.dumps({"levels": [3], "global_seed": 9}))
    assert SynthConfig.from_file(str(json_path)).global_seed == 9
    with pytest.raises(InvalidArgumentError):
        SynthConfig.from_file(str(tmp_path / "run.yaml"))


def test_thread_setting(monkeypatch):
    monkeypatch.setenv("DEGRADEKIT_THREADS", "3")
    assert SynthConfig().resolve_threads() == 3
    assert SynthConfig(threads=2).resolve_threads() == 2
    monkeypatch.setenv("DEGRADEKIT_THREADS", "many")
    with pytest.raises(InvalidArgumentError):
        SynthConfig().resolve_threads()
    monkeypatch.delenv("DEGRADEKIT_THREADS")
    assert SynthConfig().resolve_threads() >= 1


def test_rephrased_prompts_parse(synth_config, pair_dir, bank):
    config = replace(synth_config, rephrase=True, kinds=("stripe_noise", "over_exposure"), levels=(3,))
    manifest = DatasetSynthesizer(config).synthesize(discover_pairs(pair_dir))
    for record in manifest.records:
        assert [s.kind for s in bank.parse_prompt(record.prompt)] == [record.kind]
