"""Shared fixtures: deterministic natural-image corpora for estimator tests.

The corpora are built from scikit-image's bundled photographs. Crops are
tone-compressed into a reduced range and screened so the codec's decode
stage never clamps, because clamping at the 0/255 rails breaks the
near-idempotence of recompression that the estimators rely on; the
screening predicates are properties of the codec, not of any estimator
result.
"""

from __future__ import annotations

import numpy as np
import pytest

from jfactor import PixelImage
from jfactor.codec import (
    DCT_MATRIX,
    blockify,
    deblockify,
    quant_table_from_qf,
    round_half_away_from_zero,
)
from jfactor.image import round_to_uint8

CROP = 256

SINGLE_QF_SET = (10, 25, 40, 60, 75, 90, 95)


def _to_gray(arr: np.ndarray) -> np.ndarray:
    if arr.ndim == 3:
        arr = arr[..., :3]
        y = 0.299 * arr[..., 0] + 0.587 * arr[..., 1] + 0.114 * arr[..., 2]
        return round_to_uint8(y)
    return arr.astype(np.uint8)


def _squeeze(arr: np.ndarray, lo: int, hi: int) -> np.ndarray:
    scaled = lo + arr.astype(np.float64) * (hi - lo) / 255.0
    return round_to_uint8(scaled)


def _decode_preclip_range(pixels: np.ndarray, qf: int) -> tuple[float, float]:
    """Min/max of the decoded plane before the final clamp."""
    table = quant_table_from_qf(qf, "luma").entries.astype(np.float64)
    blocks, shape = blockify(pixels.astype(np.float64) - 128.0)
    coeffs = DCT_MATRIX @ blocks @ DCT_MATRIX.T
    quantized = round_half_away_from_zero(coeffs / table)
    recon = DCT_MATRIX.T @ (quantized * table) @ DCT_MATRIX
    plane = deblockify(recon, shape) + 128.0
    return float(plane.min()), float(plane.max())


def decode_is_clamp_free(pixels: np.ndarray, qf: int) -> bool:
    lo, hi = _decode_preclip_range(pixels, qf)
    return lo >= -0.49 and hi <= 255.49


def _block_stds(pixels: np.ndarray) -> np.ndarray:
    h, w = pixels.shape
    hh, ww = h - h % 8, w - w % 8
    blocks = (
        pixels[:hh, :ww]
        .astype(np.float64)
        .reshape(hh // 8, 8, ww // 8, 8)
        .transpose(0, 2, 1, 3)
        .reshape(-1, 64)
    )
    return blocks.std(axis=1)


def _source_planes() -> list[tuple[str, np.ndarray]]:
    from skimage import data

    names = [
        "astronaut",
        "camera",
        "chelsea",
        "coffee",
        "coins",
        "moon",
        "brick",
        "grass",
        "gravel",
        "immunohistochemistry",
        "page",
        "text",
        "rocket",
        "hubble_deep_field",
        "retina",
        "cell",
    ]
    planes = []
    for name in names:
        try:
            planes.append((name, _to_gray(getattr(data, name)())))
        except Exception:
            continue
    try:
        planes.append(("motorcycle", _to_gray(data.stereo_motorcycle()[0])))
    except Exception:
        pass
    return planes


def _corner_crops(plane: np.ndarray, size: int) -> list[tuple[str, np.ndarray]]:
    h, w = plane.shape
    if h < size or w < size:
        return []
    corners = [
        (0, 0),
        (0, w - size),
        (h - size, 0),
        (h - size, w - size),
        ((h - size) // 2, (w - size) // 2),
    ]
    out = []
    seen = set()
    for r, c in corners:
        if (r, c) in seen:
            continue
        seen.add((r, c))
        out.append((f"[{r},{c}]", plane[r : r + size, c : c + size]))
    return out


def build_single_qf_corpus(limit: int = 20) -> list[tuple[str, PixelImage]]:
    """Crops on which decode never clamps at any tested quality factor."""
    corpus = []
    for name, plane in _source_planes():
        for tag, crop in _corner_crops(plane, CROP):
            squeezed = _squeeze(crop, 32, 223)
            if squeezed.std() <= 12:
                continue
            if all(decode_is_clamp_free(squeezed, qf) for qf in SINGLE_QF_SET):
                corpus.append((name + tag, PixelImage(squeezed)))
        if len(corpus) >= limit:
            break
    return corpus[:limit]


def build_textured_corpus(
    min_active: float = 0.5, per_source: int = 3, lo: int = 16, hi: int = 239
) -> list[tuple[str, PixelImage]]:
    """Crops with dense local texture, for double-compression estimation."""
    corpus = []
    for name, plane in _source_planes():
        kept = 0
        for tag, crop in _corner_crops(plane, CROP):
            if kept >= per_source:
                break
            squeezed = _squeeze(crop, lo, hi)
            stds = _block_stds(squeezed)
            if float((stds >= 8).mean()) < min_active:
                continue
            corpus.append((name + tag, PixelImage(squeezed)))
            kept += 1
    return corpus


@pytest.fixture(scope="session")
def natural_gray() -> PixelImage:
    from skimage import data

    return PixelImage(_squeeze(_to_gray(data.camera())[:256, :256], 16, 239))


@pytest.fixture(scope="session")
def natural_color() -> PixelImage:
    from skimage import data

    return PixelImage(np.ascontiguousarray(data.astronaut()[:256, :256]))


@pytest.fixture(scope="session")
def small_gray() -> PixelImage:
    from skimage import data

    return PixelImage(_squeeze(_to_gray(data.camera())[64:192, 64:192], 16, 239))


@pytest.fixture(scope="session")
def textured_gray() -> PixelImage:
    from skimage import data

    return PixelImage(_squeeze(_to_gray(data.gravel())[:256, :256], 16, 239))


DOUBLE_QF_MENU = {10: (35, 50, 70, 90), 30: (55, 70, 90), 50: (75, 85, 95)}

DOUBLE_SHIFT_CYCLE = (
    (1, 1), (3, 5), (6, 2), (2, 7), (0, 4), (5, 0), (7, 3), (4, 6),
)


def build_double_qf_cases() -> list[tuple[str, PixelImage, int, int, tuple[int, int]]]:
    """Non-aligned double-compression cases where neither decode stage clamps.

    Each textured crop is paired with every (qf1, qf2) from the menu and a
    cycling non-aligned shift; a case is kept only if decoding is clamp-free
    both at qf1 on the clean crop and at qf2 on the shifted intermediate.
    """
    from jfactor import Shift, jpeg_roundtrip
    from jfactor.degrade import shift_crop

    corpus = build_textured_corpus(min_active=0.5, per_source=3, lo=16, hi=239)
    cases = []
    idx = 0
    for name, img in corpus:
        for qf1, qf2s in DOUBLE_QF_MENU.items():
            for qf2 in qf2s:
                shift = DOUBLE_SHIFT_CYCLE[idx % len(DOUBLE_SHIFT_CYCLE)]
                idx += 1
                if not decode_is_clamp_free(img.pixels, qf1):
                    continue
                mid = shift_crop(jpeg_roundtrip(img, qf1), Shift(*shift))
                if not decode_is_clamp_free(mid.pixels, qf2):
                    continue
                cases.append((name, img, qf1, qf2, shift))
    return cases


@pytest.fixture(scope="session")
def single_qf_corpus() -> list[tuple[str, PixelImage]]:
    return build_single_qf_corpus()
