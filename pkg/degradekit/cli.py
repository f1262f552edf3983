# cli.py

"""
Command-line interface of `degradekit`.

Subcommands:
    degrade   Degrade one infrared / visible pair from a JSON spec or a prompt.
    synth     Build a dataset from a TOML / JSON config.
    verify    Re-derive a dataset manifest and compare against the stored PNGs.
    metrics   Print EN, SD, Qabf, SSIM and the fusion losses of a fused image.
    spectrum  Write the centered log-magnitude spectrum and the signature of an image.
    prompt    Render specs as a prompt, or parse a prompt back into specs.

Exit codes:
    0 success, 1 verification failed, 2 invalid arguments, 3 I/O failure, 4 prompt did not parse.

Machine-readable results go to stdout; logs go to stderr (-v for INFO, -vv for DEBUG).

Examples:
    $ degradekit degrade --ir ir.png --vi vi.png --prompt "We are performing infrared and visible image fusion, where the visible modality suffers from a grade-4 rain." --out out/
    $ degradekit synth configs/all_kinds.toml --input-dir data/clean
    records=240 skipped=0
    $ degradekit metrics --fused fused.png --ir ir.png --vi vi.png --format csv
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import pandas as pd

from .dataset import MANIFEST_NAME, DatasetManifest, DatasetSynthesizer, SynthConfig, derive_seed, discover_pairs
from .degrader import ImagingModel
from .exceptions import DatasetWriteError, InvalidArgumentError, PromptParseError
from .image_utils import INTENSITY_SCALE, ImageUtils
from .losses import FusionMetrics, LossWeights
from .prompt_bank import PromptBank
from .severity import DegradationSpec
from .signatures import SignatureExtractor

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_PARSE = 4


def load_spec_list(text, default_seed=0):
    """Specs from a JSON string or a .json file holding one object or a list of objects."""
    if os.path.isfile(text):
        with open(text, "r", encoding="utf-8") as file:
            data = json.load(file)
    else:
        data = json.loads(text)
    if isinstance(data, dict):
        data = data.get("specs", [data])
    if not isinstance(data, list) or not data:
        raise InvalidArgumentError("--spec must hold a JSON object or a non-empty list of objects.")
    specs = []
    for item in data:
        if isinstance(item, dict):
            item = {"seed": default_seed, **item}
        specs.append(DegradationSpec.from_dict(item))
    return specs


def parse_prompt_specs(text, seed):
    """Parses a prompt; each spec gets a seed derived from the run seed."""
    specs = PromptBank.default().parse_prompt(text)
    return [replace(spec, seed=derive_seed(seed, "prompt", spec.kind, spec.level)) for spec in specs]


def read_pair(ir_path, vi_path):
    ir = ImageUtils.read_png(ir_path)
    vi = ImageUtils.read_png(vi_path)
    if not ir.is_gray:
        ir = ImageUtils.luminance(ir)
    if (ir.height, ir.width) != (vi.height, vi.width):
        raise InvalidArgumentError(f"Infrared is {ir.height}x{ir.width} but visible is {vi.height}x{vi.width}.")
    return ir, vi


def cmd_degrade(args):
    if args.prompt is not None:
        specs = parse_prompt_specs(args.prompt, args.seed)
    else:
        specs = load_spec_list(args.spec, default_seed=args.seed)
    ir, vi = read_pair(args.ir, args.vi)
    model = ImagingModel(scale=args.scale, sky_far=args.sky_far, jitter=args.jitter)
    resolved = [spec.resolved(jitter=args.jitter) for spec in specs]
    ir_out, vi_out = model.compose(ir, vi, resolved)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "infrared": ImageUtils.write_png(ir_out, str(out / "ir.png")),
        "visible": ImageUtils.write_png(vi_out, str(out / "vi.png")),
        "spec": str(out / "spec.json"),
    }
    prompt = PromptBank.default().render_prompt(resolved) if len(resolved) <= 2 else None
    with open(paths["spec"], "w", encoding="utf-8") as file:
        json.dump({"prompt": prompt, "specs": [spec.to_dict() for spec in resolved]}, file, indent=2)
    logger.info("Degraded pair saved to %s", out)
    print(json.dumps(paths))
    return EXIT_OK


def cmd_synth(args):
    config = SynthConfig.from_file(args.config)
    given = {
        "input_dir": args.input_dir,
        "output_dir": args.output_dir,
        "threads": args.threads,
        "scale": args.scale,
    }
    overrides = {key: value for key, value in given.items() if value is not None}
    if overrides:
        config = replace(config, **overrides)
    if config.input_dir is None:
        raise InvalidArgumentError("No input directory: set input_dir in the config or pass --input-dir.")
    synthesizer = DatasetSynthesizer(config)
    try:
        manifest = synthesizer.synthesize(discover_pairs(config.input_dir))
    except DatasetWriteError as e:
        if e.manifest is not None:
            print(f"records={len(e.manifest.records)} skipped={len(e.manifest.skipped)} partial=true")
        raise
    print(f"records={len(manifest.records)} skipped={len(manifest.skipped)}")
    return EXIT_OK


def cmd_verify(args):
    path = Path(args.manifest)
    if path.is_dir():
        path = path / MANIFEST_NAME
    manifest = DatasetManifest.load(path)
    report = DatasetSynthesizer().verify(manifest, path.parent, fraction=args.fraction, seed=args.seed)
    print(json.dumps(report.to_dict()))
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def cmd_metrics(args):
    fused = ImageUtils.read_png(args.fused)
    ir = ImageUtils.read_png(args.ir)
    vi = ImageUtils.read_png(args.vi)
    row = FusionMetrics.row(fused, ir, vi, weights=LossWeights(), ir_broadcast=args.ir_broadcast)
    if args.format == "csv":
        pd.DataFrame([row]).to_csv(sys.stdout, index=False, float_format="%.17g")
    else:
        print(json.dumps(row))
    return EXIT_OK


def cmd_spectrum(args):
    extractor = SignatureExtractor(bins=args.bins)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for path in args.images:
        gray = ImageUtils.luminance(ImageUtils.read_png(path))
        stem = Path(path).stem
        spectrum_path = ImageUtils.write_png(extractor.spectrum_image(gray), str(out / f"{stem}_spectrum.png"))
        signature_path = str(out / f"{stem}_signature.json")
        extractor.to_json(extractor.signature(gray), signature_path)
        written[path] = {"spectrum": spectrum_path, "signature": signature_path}
    print(json.dumps(written))
    return EXIT_OK


def cmd_prompt_render(args):
    specs = load_spec_list(args.spec)
    print(PromptBank.default().render_prompt(specs, template_id=args.template_id, seed=args.seed))
    return EXIT_OK


def cmd_prompt_parse(args):
    specs = PromptBank.default().parse_prompt(args.text)
    print(json.dumps([{k: v for k, v in spec.to_dict().items() if k != "seed"} for spec in specs]))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="degradekit", description="Degradation toolkit for infrared / visible image fusion.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    degrade = sub.add_parser("degrade", help="Degrade one infrared / visible pair")
    degrade.add_argument("--ir", required=True, help="Clean infrared PNG")
    degrade.add_argument("--vi", required=True, help="Clean visible PNG")
    source = degrade.add_mutually_exclusive_group(required=True)
    source.add_argument("--spec", help="JSON spec (object or list), inline or as a .json file")
    source.add_argument("--prompt", help="Degradation prompt from the template bank")
    degrade.add_argument("--out", required=True, help="Output directory")
    degrade.add_argument("--seed", type=int, default=0, help="Seed for specs without one (default: 0)")
    degrade.add_argument("--jitter", action="store_true", help="Jitter levels when resolving parameters")
    degrade.add_argument("--sky-far", action="store_true", help="Fallback depth grows toward the top row")
    degrade.add_argument("--scale", type=float, default=INTENSITY_SCALE, help="Intensity scale of noise parameters (default: 255)")
    degrade.set_defaults(func=cmd_degrade)

    synth = sub.add_parser("synth", help="Synthesize a dataset from a config")
    synth.add_argument("config", help="TOML or JSON config file")
    synth.add_argument("--input-dir", help="Override the config's input_dir")
    synth.add_argument("--output-dir", help="Override the config's output_dir")
    synth.add_argument("--threads", type=int, help="Worker threads (default: config, then DEGRADEKIT_THREADS)")
    synth.add_argument("--scale", type=float, help="Override the config's intensity scale")
    synth.set_defaults(func=cmd_synth)

    verify = sub.add_parser("verify", help="Verify a synthesized dataset")
    verify.add_argument("manifest", help="manifest.json or the dataset directory")
    verify.add_argument("--fraction", type=float, default=1.0, help="Share of records regenerated (default: 1.0)")
    verify.add_argument("--seed", type=int, default=0, help="Seed of the regenerated sample")
    verify.set_defaults(func=cmd_verify)

    metrics = sub.add_parser("metrics", help="Fusion metrics and losses of a fused image")
    metrics.add_argument("--fused", required=True)
    metrics.add_argument("--ir", required=True)
    metrics.add_argument("--vi", required=True)
    metrics.add_argument("--format", choices=("json", "csv"), default="json")
    metrics.add_argument("--ir-broadcast", action="store_true", help="Intensity loss per color channel instead of on luminance")
    metrics.set_defaults(func=cmd_metrics)

    spectrum = sub.add_parser("spectrum", help="Spectrum image and signature per input")
    spectrum.add_argument("images", nargs="+", help="Input PNGs")
    spectrum.add_argument("--out", default=".", help="Output directory (default: .)")
    spectrum.add_argument("--bins", type=int, default=32, help="Radial bins (default: 32)")
    spectrum.set_defaults(func=cmd_spectrum)

    prompt = sub.add_parser("prompt", help="Render or parse degradation prompts")
    prompt_sub = prompt.add_subparsers(dest="prompt_command", required=True)
    render = prompt_sub.add_parser("render", help="Render specs as a prompt")
    render.add_argument("--spec", required=True, help="JSON spec (object or list), inline or as a .json file")
    render.add_argument("--template-id", help="Template to use, e.g. single/perform/suffers")
    render.add_argument("--seed", type=int, help="Pick a seeded rephrasing")
    render.set_defaults(func=cmd_prompt_render)
    parse = prompt_sub.add_parser("parse", help="Parse a prompt into specs")
    parse.add_argument("text", help="Prompt text")
    parse.set_defaults(func=cmd_prompt_parse)
    return parser


def configure_logging(verbosity):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.func(args)
    except PromptParseError as e:
        print(f"error: {e}", file=sys.stderr)
        if e.nearest_template:
            print(f"hint: nearest template is {e.nearest_template!r}", file=sys.stderr)
        return EXIT_PARSE
    except (InvalidArgumentError, KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (DatasetWriteError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
