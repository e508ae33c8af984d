"""Image container, file I/O, and color-space conversion.

Images are 8-bit, grayscale or RGB, held as numpy arrays. All lossy
processing elsewhere in the package happens in float64; this module owns
the only conversions between files, uint8 sample grids, and luma.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import ValidationError

READABLE_EXTENSIONS = {".png", ".bmp", ".ppm", ".pgm"}


@dataclass(eq=False)
class PixelImage:
    """An 8-bit image: HxW (grayscale) or HxWx3 (RGB) uint8 samples."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.pixels)
        if a.dtype != np.uint8:
            raise ValidationError(f"pixels must be uint8, got {a.dtype}")
        if a.ndim == 2:
            pass
        elif a.ndim == 3 and a.shape[2] == 3:
            pass
        else:
            raise ValidationError(f"pixels must be HxW or HxWx3, got shape {a.shape}")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise ValidationError(f"image must be at least 1x1, got shape {a.shape}")
        self.pixels = np.ascontiguousarray(a)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3

    @property
    def is_gray(self) -> bool:
        return self.pixels.ndim == 2

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PixelImage):
            return NotImplemented
        return (
            self.pixels.shape == other.pixels.shape
            and bool(np.array_equal(self.pixels, other.pixels))
        )


def round_to_uint8(x: np.ndarray) -> np.ndarray:
    """Clamp to [0, 255] and round halves up; the package-wide pixel rounding."""
    return np.clip(np.floor(x + 0.5), 0.0, 255.0).astype(np.uint8)


def rgb_to_ycbcr(rgb: np.ndarray) -> np.ndarray:
    """Full-range BT.601 RGB -> YCbCr on float arrays; no rounding."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0
    cr = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0
    return np.stack([y, cb, cr], axis=-1)


def ycbcr_to_rgb(ycc: np.ndarray) -> np.ndarray:
    """Inverse of rgb_to_ycbcr; float in, float out, unclamped."""
    ycc = np.asarray(ycc, dtype=np.float64)
    y, cb, cr = ycc[..., 0], ycc[..., 1] - 128.0, ycc[..., 2] - 128.0
    r = y + 1.402 * cr
    g = y - 0.344136 * cb - 0.714136 * cr
    b = y + 1.772 * cb
    return np.stack([r, g, b], axis=-1)


def to_luma(img: PixelImage) -> PixelImage:
    """BT.601 luma of an image; grayscale input passes through unchanged."""
    if img.is_gray:
        return img
    y = rgb_to_ycbcr(img.pixels.astype(np.float64))[..., 0]
    return PixelImage(round_to_uint8(y))


def load_image(path: str | os.PathLike) -> PixelImage:
    """Read a PNG/BMP/PPM/PGM file as grayscale or RGB."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext not in READABLE_EXTENSIONS:
        raise ValidationError(f"unsupported image extension {ext!r}: {path}")
    with Image.open(path) as im:
        if im.mode == "L":
            arr = np.asarray(im, dtype=np.uint8)
        elif im.mode in ("I;16", "I"):
            arr = (np.asarray(im, dtype=np.float64) / 257.0)
            arr = round_to_uint8(arr)
        else:
            arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    return PixelImage(arr)


def save_png(img: PixelImage, path: str | os.PathLike) -> None:
    """Write a PNG with fixed encoder settings so output bytes are stable."""
    mode = "L" if img.is_gray else "RGB"
    Image.fromarray(img.pixels, mode=mode).save(path, format="PNG", compress_level=6)
