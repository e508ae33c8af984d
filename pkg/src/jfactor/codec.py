"""Pixel-domain baseline JPEG model.

Implements the lossy core of baseline JPEG on decoded pixels: quality
factor to quantization table scaling, orthonormal 8x8 block DCT,
quantize/dequantize, and the full decode(encode(.)) round trip for
grayscale and color images. Entropy coding is lossless and therefore
omitted; the currency of every operation is pixels, not bitstreams.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .image import (
    PixelImage,
    round_to_uint8,
    rgb_to_ycbcr,
    ycbcr_to_rgb,
)

# Annex-K base quantization tables (row-major, natural order).
BASE_LUMA_TABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.int64,
)

BASE_CHROMA_TABLE = np.array(
    [
        [17, 18, 24, 47, 99, 99, 99, 99],
        [18, 21, 26, 66, 99, 99, 99, 99],
        [24, 26, 56, 99, 99, 99, 99, 99],
        [47, 66, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
    ],
    dtype=np.int64,
)

COMPONENT_KINDS = ("luma", "chroma")


def validate_qf(qf: int) -> int:
    """Check a quality factor is an integer in [1, 100] and return it."""
    if isinstance(qf, bool) or not isinstance(qf, (int, np.integer)):
        raise ValidationError(f"quality factor must be an integer, got {qf!r}")
    qf = int(qf)
    if not 1 <= qf <= 100:
        raise ValidationError(f"quality factor must be in [1, 100], got {qf}")
    return qf


@dataclass(frozen=True)
class QuantTable:
    """An 8x8 integer quantization table for one component kind."""

    entries: np.ndarray
    component_kind: str = "luma"

    def __post_init__(self) -> None:
        e = np.asarray(self.entries, dtype=np.int64)
        if e.shape != (8, 8):
            raise ValidationError(f"table must be 8x8, got shape {e.shape}")
        if e.min() < 1 or e.max() > 255:
            raise ValidationError("table entries must be in [1, 255]")
        if self.component_kind not in COMPONENT_KINDS:
            raise ValidationError(f"unknown component kind {self.component_kind!r}")
        object.__setattr__(self, "entries", e)

    def dump_text(self) -> str:
        """Render as 8 rows of 8 space-separated integers."""
        return "\n".join(" ".join(str(v) for v in row) for row in self.entries)


def quant_table_from_qf(qf: int, kind: str = "luma") -> QuantTable:
    """Scale the base table for a quality factor.

    scale = 5000/qf (qf < 50) else 200 - 2*qf; each entry is
    clamp(floor((base * scale + 50) / 100), 1, 255).
    """
    qf = validate_qf(qf)
    if kind not in COMPONENT_KINDS:
        raise ValidationError(f"unknown component kind {kind!r}")
    base = BASE_LUMA_TABLE if kind == "luma" else BASE_CHROMA_TABLE
    scale = 5000 // qf if qf < 50 else 200 - 2 * qf
    entries = np.clip((base * scale + 50) // 100, 1, 255)
    return QuantTable(entries=entries, component_kind=kind)


def _dct_matrix() -> np.ndarray:
    # Orthonormal DCT-II basis: C[k, n] = s(k) * cos(pi * (2n + 1) * k / 16).
    k = np.arange(8).reshape(8, 1)
    n = np.arange(8).reshape(1, 8)
    c = np.cos(np.pi * (2 * n + 1) * k / 16.0) / 2.0
    c[0, :] /= np.sqrt(2.0)
    return c


DCT_MATRIX = _dct_matrix()


def fdct8x8(block: np.ndarray) -> np.ndarray:
    """Orthonormal 2-D DCT-II of level-shifted 8x8 blocks (batched on leading axes)."""
    block = np.asarray(block, dtype=np.float64)
    if block.shape[-2:] != (8, 8):
        raise ValidationError(f"blocks must end in 8x8, got shape {block.shape}")
    return DCT_MATRIX @ block @ DCT_MATRIX.T


def idct8x8(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of fdct8x8."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape[-2:] != (8, 8):
        raise ValidationError(f"blocks must end in 8x8, got shape {coeffs.shape}")
    return DCT_MATRIX.T @ coeffs @ DCT_MATRIX


def round_half_away_from_zero(x: np.ndarray) -> np.ndarray:
    """Round with ties away from zero, the quantizer's tie rule."""
    x = np.asarray(x, dtype=np.float64)
    return np.trunc(x + np.copysign(0.5, x))


def quantize_block(coeffs: np.ndarray, table: QuantTable) -> np.ndarray:
    """Divide by the table and round half away from zero; integer output."""
    q = round_half_away_from_zero(np.asarray(coeffs, dtype=np.float64) / table.entries)
    return q.astype(np.int64)


def dequantize_block(quantized: np.ndarray, table: QuantTable) -> np.ndarray:
    """Entrywise multiply by the table."""
    return np.asarray(quantized, dtype=np.float64) * table.entries


@dataclass(frozen=True)
class CodecConfig:
    """Pipeline options: chroma subsampling mode and luma-only operation."""

    chroma_subsampling: str = "420"
    grayscale_mode: bool = False

    def __post_init__(self) -> None:
        if self.chroma_subsampling not in ("420", "444"):
            raise ValidationError(
                f"chroma_subsampling must be '420' or '444', got {self.chroma_subsampling!r}"
            )


def blockify(plane: np.ndarray) -> tuple[np.ndarray, tuple[int, int]]:
    """Split a 2-D plane into 8x8 blocks, edge-padding to a multiple of 8.

    Returns (blocks, original_shape) with blocks shaped (rows, cols, 8, 8).
    """
    plane = np.asarray(plane, dtype=np.float64)
    h, w = plane.shape
    pad_h, pad_w = (-h) % 8, (-w) % 8
    padded = np.pad(plane, ((0, pad_h), (0, pad_w)), mode="edge")
    ph, pw = padded.shape
    blocks = padded.reshape(ph // 8, 8, pw // 8, 8).transpose(0, 2, 1, 3)
    return blocks, (h, w)


def deblockify(blocks: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Reassemble blockify output and crop padding back off."""
    rows, cols = blocks.shape[:2]
    plane = blocks.transpose(0, 2, 1, 3).reshape(rows * 8, cols * 8)
    return plane[: shape[0], : shape[1]]


def _roundtrip_plane(plane: np.ndarray, table: QuantTable) -> np.ndarray:
    """Lossy round trip of one sample plane; float in [0,255]-ish out, unclamped."""
    blocks, shape = blockify(np.asarray(plane, dtype=np.float64) - 128.0)
    coeffs = fdct8x8(blocks)
    quantized = round_half_away_from_zero(coeffs / table.entries)
    recon = idct8x8(quantized * table.entries)
    return deblockify(recon, shape) + 128.0


def _downsample_420(plane: np.ndarray) -> np.ndarray:
    # 2x2 box mean; odd dims are edge-padded to even first.
    h, w = plane.shape
    padded = np.pad(plane, ((0, h % 2), (0, w % 2)), mode="edge")
    ph, pw = padded.shape
    return padded.reshape(ph // 2, 2, pw // 2, 2).mean(axis=(1, 3))


def _upsample_420(plane: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    # Nearest-neighbor 2x expansion, cropped to the target shape.
    up = np.repeat(np.repeat(plane, 2, axis=0), 2, axis=1)
    return up[: shape[0], : shape[1]]


def jpeg_roundtrip(img: PixelImage, qf: int, cfg: CodecConfig = CodecConfig()) -> PixelImage:
    """Decode(encode(img)) at a quality factor; deterministic, dims preserved.

    Grayscale images use the luma table. Color images convert to YCbCr,
    compress Y with the luma table and Cb/Cr with the chroma table
    (subsampled per cfg), then convert back. With cfg.grayscale_mode a
    color input is reduced to its luma plane first and the result is
    grayscale.
    """
    qf = validate_qf(qf)
    if cfg.grayscale_mode and not img.is_gray:
        from .image import to_luma

        img = to_luma(img)
    luma_table = quant_table_from_qf(qf, "luma")
    if img.is_gray:
        out = _roundtrip_plane(img.pixels, luma_table)
        return PixelImage(round_to_uint8(out))

    chroma_table = quant_table_from_qf(qf, "chroma")
    ycc = rgb_to_ycbcr(img.pixels)
    shape = ycc.shape[:2]
    y_out = _roundtrip_plane(ycc[..., 0], luma_table)
    chroma_out = []
    for c in (1, 2):
        plane = ycc[..., c]
        if cfg.chroma_subsampling == "420":
            small = _roundtrip_plane(_downsample_420(plane), chroma_table)
            chroma_out.append(_upsample_420(small, shape))
        else:
            chroma_out.append(_roundtrip_plane(plane, chroma_table))
    rgb = ycbcr_to_rgb(np.stack([y_out, *chroma_out], axis=-1))
    return PixelImage(round_to_uint8(rgb))
