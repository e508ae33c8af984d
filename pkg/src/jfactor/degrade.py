"""Single and double JPEG degradation with block-grid misalignment.

A double degradation compresses at qf1, removes the first i rows and j
columns (0..7 each), and compresses again at qf2. The removed margin
misaligns the second compression's 8x8 grid against the first whenever
(i, j) != (0, 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional

from .codec import CodecConfig, jpeg_roundtrip, validate_qf
from .errors import ValidationError
from .image import PixelImage

DoubleRegime = Literal["simple", "complex"]


@dataclass(frozen=True)
class Shift:
    """Rows/columns removed before the second compression; each in 0..7."""

    i: int = 0
    j: int = 0

    def __post_init__(self) -> None:
        for name, v in (("i", self.i), ("j", self.j)):
            if isinstance(v, bool) or not isinstance(v, int):
                raise ValidationError(f"shift {name} must be an integer, got {v!r}")
            if not 0 <= v <= 7:
                raise ValidationError(f"shift {name} must be in [0, 7], got {v}")

    @property
    def aligned(self) -> bool:
        return self.i == 0 and self.j == 0


@dataclass(frozen=True)
class DegradationRecipe:
    """Everything needed to reproduce one degradation run."""

    kind: Literal["single", "double"]
    qf1: int
    qf2: Optional[int] = None
    shift: Optional[Shift] = None
    codec: CodecConfig = field(default_factory=CodecConfig)

    def __post_init__(self) -> None:
        validate_qf(self.qf1)
        if self.kind == "single":
            if self.qf2 is not None or self.shift is not None:
                raise ValidationError("single recipe must not carry qf2 or shift")
        elif self.kind == "double":
            if self.qf2 is None or self.shift is None:
                raise ValidationError("double recipe requires qf2 and shift")
            validate_qf(self.qf2)
        else:
            raise ValidationError(f"unknown recipe kind {self.kind!r}")

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind, "qf1": self.qf1}
        if self.kind == "double":
            d["qf2"] = self.qf2
            d["shift"] = [self.shift.i, self.shift.j]
        d["codec"] = {
            "chroma_subsampling": self.codec.chroma_subsampling,
            "grayscale_mode": self.codec.grayscale_mode,
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DegradationRecipe":
        codec = CodecConfig(**d.get("codec", {}))
        shift = Shift(*d["shift"]) if d.get("shift") is not None else None
        return cls(
            kind=d["kind"],
            qf1=d["qf1"],
            qf2=d.get("qf2"),
            shift=shift,
            codec=codec,
        )


def shift_crop(img: PixelImage, s: Shift) -> PixelImage:
    """Remove the first s.i rows and s.j columns."""
    if img.height <= s.i or img.width <= s.j:
        raise ValidationError(
            f"image {img.height}x{img.width} too small for shift ({s.i},{s.j})"
        )
    return PixelImage(img.pixels[s.i :, s.j :].copy())


def degrade_single(img: PixelImage, qf: int, cfg: CodecConfig = CodecConfig()) -> PixelImage:
    """One JPEG compress/decompress pass."""
    return jpeg_roundtrip(img, qf, cfg)


def degrade_double(
    img: PixelImage,
    qf1: int,
    qf2: int,
    s: Shift,
    cfg: CodecConfig = CodecConfig(),
) -> PixelImage:
    """Compress at qf1, shift-crop, compress at qf2.

    The matching clean reference for metric evaluation is
    shift_crop(img, s), whose dimensions equal the output's.
    """
    first = jpeg_roundtrip(img, qf1, cfg)
    return jpeg_roundtrip(shift_crop(first, s), qf2, cfg)


def apply_recipe(img: PixelImage, recipe: DegradationRecipe) -> PixelImage:
    """Run a recipe against an image."""
    if recipe.kind == "single":
        return degrade_single(img, recipe.qf1, recipe.codec)
    return degrade_double(img, recipe.qf1, recipe.qf2, recipe.shift, recipe.codec)


def classify_double_regime(aligned: bool, qf1: int, qf2: int) -> DoubleRegime:
    """Taxonomy of double compression.

    Aligned grids, or misaligned with qf1 > qf2, behave like a single
    compression (simple). Misaligned with qf1 <= qf2 leaves composite
    artifacts from both passes (complex).
    """
    validate_qf(qf1)
    validate_qf(qf2)
    if aligned or qf1 > qf2:
        return "simple"
    return "complex"
