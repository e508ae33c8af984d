"""Batch command-line interface.

Machine-readable JSON rows go to stdout, human diagnostics to stderr.
Exit codes: 0 success, 1 validation/usage error, 2 I/O error. A JSON
config file can set any flag's default; explicit flags win. Infinite
metric values serialize as the string "inf".
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .codec import CodecConfig
from .degrade import DegradationRecipe, Shift
from .errors import ValidationError
from .estimate import (
    estimate_from_curves,
    estimate_single_qf,
    format_curve_dump,
    shift_sweep_curves,
)
from .image import READABLE_EXTENSIONS, load_image, save_png, to_luma
from .metrics import metric_report
from .synth import (
    MANIFEST_NAME,
    SynthConfig,
    _sha256_file,
    synthesize_dataset,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


class _Parser(argparse.ArgumentParser):
    # Usage problems must exit 1, not argparse's default 2.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def _jsonable(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _emit(row: dict, pretty: bool) -> None:
    if pretty:
        width = max(len(k) for k in row)
        for k, v in row.items():
            print(f"{k:<{width}}  {_jsonable(v)}")
        print()
    else:
        print(json.dumps(_jsonable(row), sort_keys=True))


def _parse_shift(text: str) -> Shift:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValidationError(f"shift must be 'i,j', got {text!r}")
    try:
        return Shift(int(parts[0]), int(parts[1]))
    except ValueError as exc:
        raise ValidationError(f"shift must be 'i,j' integers, got {text!r}") from exc


def _codec_from_args(args) -> CodecConfig:
    return CodecConfig(chroma_subsampling=args.chroma, grayscale_mode=args.gray)


def cmd_degrade(args) -> int:
    img = load_image(args.input)
    codec = _codec_from_args(args)
    if args.qf2 is not None:
        shift = _parse_shift(args.shift) if args.shift else Shift(0, 0)
        recipe = DegradationRecipe(
            kind="double", qf1=args.qf1, qf2=args.qf2, shift=shift, codec=codec
        )
    else:
        if args.shift:
            raise ValidationError("--shift requires --qf2")
        recipe = DegradationRecipe(kind="single", qf1=args.qf1, codec=codec)
    from .degrade import apply_recipe

    out = apply_recipe(img, recipe)
    save_png(out, args.output)
    _emit(
        {
            "command": "degrade",
            "input": str(args.input),
            "output": str(args.output),
            "recipe": recipe.to_dict(),
        },
        args.pretty,
    )
    return EXIT_OK


def cmd_estimate_qf(args) -> int:
    img = load_image(args.input)
    if args.mode == "single":
        qf = estimate_single_qf(img)
        row = {
            "command": "estimate-qf",
            "input": str(args.input),
            "mode": "single",
            "qf_est": qf,
        }
    else:
        curves = shift_sweep_curves(img, stride=args.stride)
        est = estimate_from_curves(curves, threshold=args.threshold)
        if args.dump_curves:
            Path(args.dump_curves).write_text(format_curve_dump(curves) + "\n")
            print(f"curve dump written to {args.dump_curves}", file=sys.stderr)
        row = {
            "command": "estimate-qf",
            "input": str(args.input),
            "mode": "dominant",
            "qf1_est": est.qf1_est,
            "qf2_est": est.qf2_est,
            "regime": est.regime_guess,
            "threshold": est.threshold_used,
        }
    _emit(row, args.pretty)
    return EXIT_OK


def _metric_pairs(args) -> list[tuple[Path, Path]]:
    if args.ref_dir or args.test_dir:
        if not (args.ref_dir and args.test_dir):
            raise ValidationError("--ref-dir and --test-dir must be given together")
        if args.ref or args.test:
            raise ValidationError("give either two files or two directories, not both")
        ref_dir, test_dir = Path(args.ref_dir), Path(args.test_dir)
        if not ref_dir.is_dir():
            raise ValidationError(f"not a directory: {ref_dir}")
        if not test_dir.is_dir():
            raise ValidationError(f"not a directory: {test_dir}")
        pairs = []
        for ref_path in sorted(ref_dir.iterdir()):
            if ref_path.suffix.lower() not in READABLE_EXTENSIONS:
                continue
            matches = sorted(test_dir.glob(ref_path.stem + ".*"))
            matches = [m for m in matches if m.suffix.lower() in READABLE_EXTENSIONS]
            if not matches:
                raise ValidationError(f"no match for {ref_path.name} in {test_dir}")
            pairs.append((ref_path, matches[0]))
        if not pairs:
            raise ValidationError(f"no readable images in {ref_dir}")
        return pairs
    if not (args.ref and args.test):
        raise ValidationError("give REF TEST files or --ref-dir/--test-dir")
    return [(Path(args.ref), Path(args.test))]


def cmd_metrics(args) -> int:
    pairs = _metric_pairs(args)
    failed = 0
    sums = {"psnr": 0.0, "ssim": 0.0, "psnr_b": 0.0, "mse": 0.0}
    scored = 0
    for ref_path, test_path in pairs:
        ref = load_image(ref_path)
        test = load_image(test_path)
        if args.luma:
            ref, test = to_luma(ref), to_luma(test)
        try:
            report = metric_report(ref, test)
        except ValidationError as exc:
            _emit(
                {
                    "command": "metrics",
                    "ref": str(ref_path),
                    "test": str(test_path),
                    "error": str(exc),
                },
                args.pretty,
            )
            failed += 1
            continue
        row = {"command": "metrics", "ref": str(ref_path), "test": str(test_path)}
        row.update(report.to_dict())
        _emit(row, args.pretty)
        for k in sums:
            sums[k] += getattr(report, k)
        scored += 1
    if scored:
        mean_row = {"command": "metrics", "kind": "mean", "pairs": scored}
        mean_row.update({k: sums[k] / scored for k in sums})
        _emit(mean_row, args.pretty)
    return EXIT_VALIDATION if failed else EXIT_OK


def cmd_synth(args) -> int:
    cfg = SynthConfig(
        source_dir=Path(args.source_dir),
        out_dir=Path(args.out_dir),
        count=args.count,
        seed=args.seed,
        patch_size=args.patch_size,
        qf_range=(args.qf_lo, args.qf_hi),
        mode=args.mode,
        shift_policy=args.shift_policy,
        codec=_codec_from_args(args),
    )
    manifest = synthesize_dataset(cfg)
    manifest_path = Path(args.out_dir) / MANIFEST_NAME
    _emit(
        {
            "command": "synth",
            "count": len(manifest.entries),
            "out_dir": str(args.out_dir),
            "manifest": str(manifest_path),
            "manifest_sha256": _sha256_file(manifest_path),
            "skipped_sources": len(manifest.header["skipped"]),
        },
        args.pretty,
    )
    return EXIT_OK


def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    parser = _Parser(prog="jfactor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers: dict[str, _Parser] = {}

    def add(name: str, func, help_text: str) -> _Parser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", help="JSON file of flag defaults")
        p.add_argument("--pretty", action="store_true", help="human-readable output")
        subparsers[name] = p
        return p

    p = add("degrade", cmd_degrade, "apply single or double JPEG degradation")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--qf1", type=int, required=True)
    p.add_argument("--qf2", type=int)
    p.add_argument("--shift", help="i,j rows/cols removed before the second pass")
    p.add_argument("--chroma", choices=["420", "444"], default="420")
    p.add_argument("--gray", action="store_true", help="luma-only pipeline")

    p = add("estimate-qf", cmd_estimate_qf, "estimate quality factors from pixels")
    p.add_argument("input")
    p.add_argument("--mode", choices=["single", "dominant"], default="single")
    p.add_argument("--threshold", type=float, default=30.0)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--dump-curves", help="write per-shift curve records here")

    p = add("metrics", cmd_metrics, "score degraded images against references")
    p.add_argument("ref", nargs="?")
    p.add_argument("test", nargs="?")
    p.add_argument("--ref-dir")
    p.add_argument("--test-dir")
    p.add_argument("--luma", action="store_true", help="compare luma planes")

    p = add("synth", cmd_synth, "synthesize a degraded dataset with a manifest")
    p.add_argument("--source-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patch-size", type=int, default=128)
    p.add_argument("--qf-lo", type=int, default=10)
    p.add_argument("--qf-hi", type=int, default=95)
    p.add_argument("--mode", choices=["single", "double", "mixed"], default="single")
    p.add_argument("--shift-policy", default="random_0_7")
    p.add_argument("--chroma", choices=["420", "444"], default="420")
    p.add_argument("--gray", action="store_true")

    return parser, subparsers


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()

    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            with open(known.config) as f:
                defaults = json.load(f)
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_IO
        except json.JSONDecodeError as exc:
            print(f"error: bad config JSON: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        if not isinstance(defaults, dict):
            print("error: config must be a JSON object", file=sys.stderr)
            return EXIT_VALIDATION
        for p in subparsers.values():
            dests = {a.dest for a in p._actions}
            applicable = {k: v for k, v in defaults.items() if k in dests}
            if applicable:
                p.set_defaults(**applicable)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_VALIDATION

    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
