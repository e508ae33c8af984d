"""Blind quality-factor estimation from decoded pixels.

The estimators recompress an image at every candidate quality factor and
study the MSE between the image and its recompression. Recompressing at
the quality factor that produced the image is nearly idempotent, so the
curve dips there. For doubly compressed images the dip of the second
pass sits at the curve's global minimum, while re-aligning the block
grid (by cropping up to 7 rows/columns) exposes a dip at the first
pass's quality factor.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from .codec import (
    CodecConfig,
    DCT_MATRIX,
    blockify,
    quant_table_from_qf,
    round_half_away_from_zero,
)
from .degrade import Shift, shift_crop
from .errors import ValidationError
from .image import PixelImage, to_luma

DEFAULT_THRESHOLD = 30.0

_QF_CHUNK = 25


@dataclass(frozen=True)
class MseCurve:
    """Recompression MSE for one shift hypothesis, indexed by qf 1..100."""

    shift: Shift
    mse: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.mse, dtype=np.float64)
        if m.shape != (100,):
            raise ValidationError(f"curve must have 100 entries, got shape {m.shape}")
        if not np.all(m >= 0.0):
            raise ValidationError("curve entries must be non-negative")
        object.__setattr__(self, "mse", m)

    def value_at(self, qf: int) -> float:
        return float(self.mse[qf - 1])


@dataclass(frozen=True)
class CurveMinimum:
    """A located minimum on one curve."""

    qf: int
    mse_value: float
    kind: Literal["first_local", "global"]


@dataclass(frozen=True)
class ShiftDiagnostic:
    """Per-shift summary kept on every estimate for inspection."""

    shift: Shift
    global_min: CurveMinimum
    first_min: Optional[CurveMinimum]


@dataclass(frozen=True)
class QfEstimate:
    """Result of the dominant-QF procedure."""

    qf1_est: Optional[int]
    qf2_est: int
    regime_guess: Literal["single_or_simple", "complex_double"]
    diagnostics: tuple[ShiftDiagnostic, ...] = field(default_factory=tuple)
    threshold_used: float = DEFAULT_THRESHOLD


_LUMA_TABLES: Optional[np.ndarray] = None


def _luma_tables() -> np.ndarray:
    # (100, 8, 8) float64, row q-1 is the luma table for quality factor q.
    global _LUMA_TABLES
    if _LUMA_TABLES is None:
        _LUMA_TABLES = np.stack(
            [quant_table_from_qf(q, "luma").entries.astype(np.float64) for q in range(1, 101)]
        )
    return _LUMA_TABLES


def _curve_values(plane: np.ndarray, qfs: np.ndarray) -> np.ndarray:
    """Recompression MSE of a grayscale plane at each qf in qfs.

    Matches MSE(z, jpeg_roundtrip(z, qf)) exactly: the plane's DCT is
    computed once and re-quantized per qf, which is an algebraic identity
    of the pipeline, and the final rounding/clamping is applied in the
    block domain with padded samples masked out of the error sum.
    """
    h, w = plane.shape
    blocks, _ = blockify(plane.astype(np.float64) - 128.0)
    rows, cols = blocks.shape[:2]
    coeffs = (DCT_MATRIX @ blocks @ DCT_MATRIX.T).reshape(-1, 8, 8)

    ref = blockify(plane.astype(np.float64))[0].reshape(-1, 8, 8)
    mask = np.zeros((rows * 8, cols * 8), dtype=np.float64)
    mask[:h, :w] = 1.0
    mask = mask.reshape(rows, 8, cols, 8).transpose(0, 2, 1, 3).reshape(-1, 8, 8)

    tables = _luma_tables()
    out = np.empty(len(qfs), dtype=np.float64)
    n_samples = float(h * w)
    for start in range(0, len(qfs), _QF_CHUNK):
        chunk = qfs[start : start + _QF_CHUNK]
        t = tables[chunk - 1][:, None, :, :]
        quantized = round_half_away_from_zero(coeffs[None] / t)
        recon = DCT_MATRIX.T @ (quantized * t) @ DCT_MATRIX
        pixels = np.clip(np.floor(recon + 128.0 + 0.5), 0.0, 255.0)
        diff = (pixels - ref[None]) * mask[None]
        out[start : start + len(chunk)] = np.einsum("qbij,qbij->q", diff, diff) / n_samples
    return out


def _as_luma_plane(y: PixelImage) -> np.ndarray:
    return to_luma(y).pixels


def recompression_mse_curve(
    y: PixelImage, s: Shift, cfg: CodecConfig = CodecConfig()
) -> MseCurve:
    """MSE(z, jpeg_roundtrip(z, qf)) for qf 1..100, where z = shift_crop(y, s).

    Color inputs are reduced to luma first; curves are always computed on
    a single plane.
    """
    z = shift_crop(PixelImage(_as_luma_plane(y)), s)
    values = _curve_values(z.pixels, np.arange(1, 101))
    return MseCurve(shift=s, mse=values)


def find_first_minimum(curve: MseCurve) -> Optional[CurveMinimum]:
    """First local minimum scanning qf ascending; endpoints excluded.

    Returns the smallest qf in 2..99 with mse[qf] < mse[qf-1] and
    mse[qf] <= mse[qf+1], so a plateau resolves to its smallest qf.
    """
    found = _first_minimum_on_grid(curve.mse, np.arange(1, 101))
    if found is None:
        return None
    qf, value = found
    return CurveMinimum(qf=qf, mse_value=value, kind="first_local")


def _first_minimum_on_grid(values: np.ndarray, qfs: np.ndarray) -> Optional[tuple[int, float]]:
    for k in range(1, len(values) - 1):
        if values[k] < values[k - 1] and values[k] <= values[k + 1]:
            return int(qfs[k]), float(values[k])
    return None


def estimate_single_qf(y: PixelImage, cfg: CodecConfig = CodecConfig()) -> int:
    """Quality factor whose recompression best reproduces y.

    Global argmin of the unshifted curve; ties break to the smaller qf.
    """
    curve = recompression_mse_curve(y, Shift(0, 0), cfg)
    return int(np.argmin(curve.mse)) + 1


def _resolve_workers(workers: Optional[int]) -> int:
    cap_env = os.environ.get("JFACTOR_THREADS", "").strip()
    cap = int(cap_env) if cap_env else None
    requested = workers if workers is not None else 1
    if cap is not None:
        requested = min(requested, max(cap, 1))
    return max(requested, 1)


def shift_sweep_curves(
    y: PixelImage,
    cfg: CodecConfig = CodecConfig(),
    stride: int = 1,
    workers: Optional[int] = None,
) -> list[MseCurve]:
    """Curves for all 64 shifts (i, j) in [0,7]^2, in row-major shift order.

    stride > 1 evaluates the qf grid 1, 1+stride, ... and holds the last
    evaluated value through skipped entries; estimates then depend only
    on evaluated grid points. Results are identical regardless of worker
    count.
    """
    if y.height < 9 or y.width < 9:
        raise ValidationError(
            f"image {y.height}x{y.width} too small for the 8x8 shift sweep"
        )
    if stride < 1:
        raise ValidationError(f"stride must be >= 1, got {stride}")
    plane = _as_luma_plane(y)
    qfs = np.arange(1, 101, stride)
    shifts = [Shift(i, j) for i in range(8) for j in range(8)]

    def one(s: Shift) -> MseCurve:
        values = _curve_values(plane[s.i :, s.j :], qfs)
        full = np.repeat(values, stride)[:100] if stride > 1 else values
        return MseCurve(shift=s, mse=full)

    n_workers = _resolve_workers(workers)
    if n_workers <= 1:
        return [one(s) for s in shifts]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(one, shifts))


def estimate_from_curves(
    curves: list[MseCurve], threshold: float = DEFAULT_THRESHOLD
) -> QfEstimate:
    """Reduce per-shift curves to a dominant-QF estimate.

    qf2_est is the qf of the global minimum over every curve (ties to the
    earlier shift, then the smaller qf). Candidate first minima must fall
    below the threshold and strictly left of qf2_est; the candidate with
    the smallest MSE gives qf1_est. The strict qf bound keeps the global
    dip itself, and re-detections of it on other shifts, from counting as
    evidence of an earlier compression.
    """
    diagnostics: list[ShiftDiagnostic] = []
    best: Optional[tuple[float, int, int]] = None
    for order, curve in enumerate(curves):
        qf = int(np.argmin(curve.mse)) + 1
        value = float(curve.mse[qf - 1])
        if best is None or (value, order, qf) < best:
            best = (value, order, qf)
        diagnostics.append(
            ShiftDiagnostic(
                shift=curve.shift,
                global_min=CurveMinimum(qf=qf, mse_value=value, kind="global"),
                first_min=find_first_minimum(curve),
            )
        )
    qf2 = best[2]

    candidates = [
        (d.first_min.mse_value, d.first_min.qf)
        for d in diagnostics
        if d.first_min is not None
        and d.first_min.mse_value < threshold
        and d.first_min.qf < qf2
    ]
    if candidates:
        _, qf1 = min(candidates)
        regime: Literal["single_or_simple", "complex_double"] = "complex_double"
        qf1_est: Optional[int] = qf1
    else:
        regime = "single_or_simple"
        qf1_est = None
    return QfEstimate(
        qf1_est=qf1_est,
        qf2_est=qf2,
        regime_guess=regime,
        diagnostics=tuple(diagnostics),
        threshold_used=float(threshold),
    )


def estimate_dominant_qf(
    y: PixelImage,
    cfg: CodecConfig = CodecConfig(),
    threshold: float = DEFAULT_THRESHOLD,
    stride: int = 1,
    workers: Optional[int] = None,
) -> QfEstimate:
    """Dominant-QF procedure over all 64 shift hypotheses."""
    curves = shift_sweep_curves(y, cfg, stride=stride, workers=workers)
    return estimate_from_curves(curves, threshold)


def format_curve_dump(curves: list[MseCurve]) -> str:
    """One JSON record per shift: minima summary plus the full mse vector."""
    lines = []
    for curve in curves:
        qf = int(np.argmin(curve.mse)) + 1
        first = find_first_minimum(curve)
        lines.append(
            json.dumps(
                {
                    "shift": [curve.shift.i, curve.shift.j],
                    "global_qf": qf,
                    "global_mse": float(curve.mse[qf - 1]),
                    "first_qf": None if first is None else first.qf,
                    "first_mse": None if first is None else first.mse_value,
                    "mse": [round(float(v), 6) for v in curve.mse],
                }
            )
        )
    return "\n".join(lines)
