"""Deterministic synthesis of degraded/clean image pairs with manifests.

Every entry's randomness comes from a counter-based generator keyed by a
stable hash of (global seed, entry index), so entries are independent of
execution order and byte-reproducible across runs and machines. The
manifest is JSON lines: a header object followed by one record per
entry, with paths relative to the manifest's directory.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from . import __version__
from .codec import CodecConfig, validate_qf
from .degrade import DegradationRecipe, Shift, apply_recipe, shift_crop
from .errors import ValidationError
from .image import READABLE_EXTENSIONS, PixelImage, load_image, save_png

MANIFEST_NAME = "manifest.jsonl"
MANIFEST_VERSION = 1
GENERATOR_NAME = "philox"

MODES = ("single", "double", "mixed")


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of one synthesis run."""

    source_dir: Path
    out_dir: Path
    count: int
    seed: int = 0
    patch_size: int = 128
    qf_range: tuple[int, int] = (10, 95)
    mode: str = "single"
    shift_policy: str = "random_0_7"
    codec: CodecConfig = field(default_factory=CodecConfig)

    def __post_init__(self) -> None:
        object.__setattr__(self, "source_dir", Path(self.source_dir))
        object.__setattr__(self, "out_dir", Path(self.out_dir))
        if self.count < 1:
            raise ValidationError(f"count must be >= 1, got {self.count}")
        if self.patch_size < 1:
            raise ValidationError(f"patch_size must be >= 1, got {self.patch_size}")
        lo, hi = self.qf_range
        validate_qf(lo)
        validate_qf(hi)
        if lo > hi:
            raise ValidationError(f"qf_range lo must be <= hi, got ({lo}, {hi})")
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        parse_shift_policy(self.shift_policy)

    def to_dict(self) -> dict:
        return {
            "source_dir": str(self.source_dir),
            "out_dir": str(self.out_dir),
            "count": self.count,
            "seed": self.seed,
            "patch_size": self.patch_size,
            "qf_range": list(self.qf_range),
            "mode": self.mode,
            "shift_policy": self.shift_policy,
            "codec": {
                "chroma_subsampling": self.codec.chroma_subsampling,
                "grayscale_mode": self.codec.grayscale_mode,
            },
        }


def parse_shift_policy(policy: str) -> Optional[Shift]:
    """Return the fixed Shift for 'fixed:i,j', or None for 'random_0_7'."""
    if policy == "random_0_7":
        return None
    if policy.startswith("fixed:"):
        parts = policy[len("fixed:") :].split(",")
        if len(parts) == 2:
            try:
                return Shift(int(parts[0]), int(parts[1]))
            except ValueError:
                pass
    raise ValidationError(
        f"shift_policy must be 'random_0_7' or 'fixed:i,j', got {policy!r}"
    )


def entry_seed(global_seed: int, index: int) -> int:
    """Stable 64-bit per-entry seed from the global seed and entry index."""
    payload = b"jfactor.synth" + int(global_seed).to_bytes(8, "big", signed=True)
    payload += int(index).to_bytes(8, "big", signed=False)
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "big")


def entry_rng(global_seed: int, index: int) -> np.random.Generator:
    """Counter-based generator for one entry; named in the manifest header."""
    return np.random.Generator(np.random.Philox(key=entry_seed(global_seed, index)))


def extract_patches(
    img: PixelImage, patch_size: int, rng: np.random.Generator, count: int = 1
) -> list[PixelImage]:
    """Axis-aligned square crops at uniformly sampled top-left corners."""
    if img.height < patch_size or img.width < patch_size:
        raise ValidationError(
            f"image {img.height}x{img.width} smaller than patch size {patch_size}"
        )
    patches = []
    for _ in range(count):
        r = int(rng.integers(0, img.height - patch_size + 1))
        c = int(rng.integers(0, img.width - patch_size + 1))
        patches.append(PixelImage(img.pixels[r : r + patch_size, c : c + patch_size].copy()))
    return patches


def _list_sources(source_dir: Path) -> list[Path]:
    if not source_dir.is_dir():
        raise ValidationError(f"source_dir is not a directory: {source_dir}")
    paths = sorted(
        p for p in source_dir.iterdir()
        if p.is_file() and p.suffix.lower() in READABLE_EXTENSIONS
    )
    if not paths:
        raise ValidationError(f"no readable images in {source_dir}")
    return paths


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _draw_recipe(cfg: SynthConfig, rng: np.random.Generator) -> DegradationRecipe:
    # Draw order is fixed: kind, qf1, then (qf2, shift) for doubles.
    lo, hi = cfg.qf_range
    if cfg.mode == "mixed":
        kind = "single" if int(rng.integers(0, 2)) == 0 else "double"
    else:
        kind = cfg.mode
    qf1 = int(rng.integers(lo, hi + 1))
    if kind == "single":
        return DegradationRecipe(kind="single", qf1=qf1, codec=cfg.codec)
    qf2 = int(rng.integers(lo, hi + 1))
    fixed = parse_shift_policy(cfg.shift_policy)
    if fixed is None:
        shift = Shift(int(rng.integers(0, 8)), int(rng.integers(0, 8)))
    else:
        shift = fixed
    return DegradationRecipe(kind="double", qf1=qf1, qf2=qf2, shift=shift, codec=cfg.codec)


def _synthesize_entry(
    cfg: SynthConfig, index: int, sources: list[Path]
) -> tuple[dict, PixelImage, PixelImage]:
    """Build entry record plus (clean, degraded) patches, without file I/O paths."""
    rng = entry_rng(cfg.seed, index)
    source_idx = int(rng.integers(0, len(sources)))
    source_path = sources[source_idx]
    img = load_image(source_path)
    recipe = _draw_recipe(cfg, rng)

    degraded_full = apply_recipe(img, recipe)
    if recipe.kind == "double":
        clean_full = shift_crop(img, recipe.shift)
    else:
        clean_full = img
    if cfg.codec.grayscale_mode:
        from .image import to_luma

        clean_full = to_luma(clean_full)
    if clean_full.pixels.shape != degraded_full.pixels.shape:
        raise ValidationError("clean/degraded dimension mismatch in synthesis")

    if degraded_full.height < cfg.patch_size or degraded_full.width < cfg.patch_size:
        raise ValidationError(
            f"source {source_path.name} too small for patch size {cfg.patch_size}"
        )
    r = int(rng.integers(0, degraded_full.height - cfg.patch_size + 1))
    c = int(rng.integers(0, degraded_full.width - cfg.patch_size + 1))
    sl = (slice(r, r + cfg.patch_size), slice(c, c + cfg.patch_size))
    clean = PixelImage(clean_full.pixels[sl].copy())
    degraded = PixelImage(degraded_full.pixels[sl].copy())

    record = {
        "index": index,
        "seed": f"{entry_seed(cfg.seed, index):016x}",
        "source": source_path.name,
        "recipe": recipe.to_dict(),
        "corner": [r, c],
    }
    return record, clean, degraded


@dataclass(frozen=True)
class Manifest:
    """Parsed manifest: header plus entry records."""

    header: dict
    entries: tuple[dict, ...]

    @property
    def config(self) -> dict:
        return self.header["config"]


def synthesize_dataset(cfg: SynthConfig) -> Manifest:
    """Generate count patch pairs plus a manifest under cfg.out_dir.

    Sources too small for the patch size (plus the 7-pixel shift margin
    in double/mixed modes) are excluded up front and listed in the
    header's skipped field, so every index draws from eligible sources
    only and the entry count always equals cfg.count.
    """
    sources = _list_sources(cfg.source_dir)
    margin = 0 if cfg.mode == "single" else 7
    eligible, skipped = [], []
    for p in sources:
        img = load_image(p)
        if img.height >= cfg.patch_size + margin and img.width >= cfg.patch_size + margin:
            eligible.append(p)
        else:
            skipped.append({"source": p.name, "reason": "smaller than patch size"})
    if not eligible:
        raise ValidationError(
            f"no source in {cfg.source_dir} is large enough for patch size {cfg.patch_size}"
        )

    out_dir = cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    for index in range(cfg.count):
        record, clean, degraded = _synthesize_entry(cfg, index, eligible)
        clean_name = f"entry_{index:06d}_clean.png"
        degraded_name = f"entry_{index:06d}_degraded.png"
        save_png(clean, out_dir / clean_name)
        save_png(degraded, out_dir / degraded_name)
        record["clean_path"] = clean_name
        record["degraded_path"] = degraded_name
        record["clean_sha256"] = _sha256_file(out_dir / clean_name)
        record["degraded_sha256"] = _sha256_file(out_dir / degraded_name)
        entries.append(record)

    header = {
        "manifest_version": MANIFEST_VERSION,
        "toolkit_version": __version__,
        "generator": GENERATOR_NAME,
        "config": cfg.to_dict(),
        "skipped": skipped,
    }
    manifest = Manifest(header=header, entries=tuple(entries))
    write_manifest(manifest, out_dir / MANIFEST_NAME)
    return manifest


def write_manifest(manifest: Manifest, path: Path | str) -> None:
    with open(path, "w") as f:
        f.write(json.dumps(manifest.header, sort_keys=True) + "\n")
        for record in manifest.entries:
            f.write(json.dumps(record, sort_keys=True) + "\n")


def read_manifest(path: Path | str) -> Manifest:
    with open(path) as f:
        lines = [line for line in f.read().splitlines() if line.strip()]
    if not lines:
        raise ValidationError(f"empty manifest: {path}")
    header = json.loads(lines[0])
    entries = tuple(json.loads(line) for line in lines[1:])
    return Manifest(header=header, entries=entries)


def replay(entry: dict, cfg_dict: dict, source_dir: Path | str) -> PixelImage:
    """Rebuild one entry's degraded patch byte-identically from its record."""
    recipe = DegradationRecipe.from_dict(entry["recipe"])
    img = load_image(Path(source_dir) / entry["source"])
    degraded_full = apply_recipe(img, recipe)
    r, c = entry["corner"]
    size = cfg_dict["patch_size"]
    return PixelImage(degraded_full.pixels[r : r + size, c : c + size].copy())


def iter_entry_shifts(cfg: SynthConfig, n_sources: int = 1) -> Iterator[Shift]:
    """Shift each entry index would draw given n_sources eligible sources.

    Replays the draw sequence without touching any image; used for
    distributional checks over large entry counts.
    """
    for index in range(cfg.count):
        rng = entry_rng(cfg.seed, index)
        rng.integers(0, n_sources)
        recipe = _draw_recipe(cfg, rng)
        if recipe.kind == "double":
            yield recipe.shift
