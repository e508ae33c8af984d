"""Reference image quality metrics: MSE, PSNR, SSIM, BEF, and PSNR-B.

All metrics operate on 0..255 samples. PSNR-B augments PSNR with a
blocking-effect factor (BEF) that penalizes excess discontinuity at
8-aligned block boundaries; BEF is computed on the degraded argument,
which makes PSNR-B asymmetric in its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d

from .errors import ValidationError
from .image import PixelImage, to_luma

PEAK = 255.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class MetricReport:
    """One image pair's scores; psnr/psnr_b are +inf when error is zero."""

    psnr: float
    ssim: float
    psnr_b: float
    mse: float

    def to_dict(self) -> dict:
        return {"psnr": self.psnr, "ssim": self.ssim, "psnr_b": self.psnr_b, "mse": self.mse}


def _check_same_shape(a: PixelImage, b: PixelImage) -> None:
    if a.pixels.shape != b.pixels.shape:
        raise ValidationError(
            f"image shapes differ: {a.pixels.shape} vs {b.pixels.shape}"
        )


def mse(a: PixelImage, b: PixelImage) -> float:
    """Mean squared sample difference on the 0..255 scale."""
    _check_same_shape(a, b)
    diff = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    return float(np.mean(diff * diff))


def psnr(a: PixelImage, b: PixelImage) -> float:
    """10*log10(255^2 / mse); +inf for identical images."""
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / err)


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    x = np.arange(size, dtype=np.float64) - half
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def _windowed_mean(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # Separable filter; cropping half the window leaves only positions whose
    # support touched real pixels, i.e. a valid-region convolution.
    half = len(kernel) // 2
    out = convolve1d(convolve1d(x, kernel, axis=0), kernel, axis=1)
    return out[half:-half, half:-half]


def _ssim_plane(x: np.ndarray, y: np.ndarray) -> float:
    kernel = _gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)
    c1 = (SSIM_K1 * PEAK) ** 2
    c2 = (SSIM_K2 * PEAK) ** 2
    mu_x = _windowed_mean(x, kernel)
    mu_y = _windowed_mean(y, kernel)
    var_x = _windowed_mean(x * x, kernel) - mu_x * mu_x
    var_y = _windowed_mean(y * y, kernel) - mu_y * mu_y
    cov = _windowed_mean(x * y, kernel) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def ssim(a: PixelImage, b: PixelImage) -> float:
    """Mean local SSIM, 11x11 Gaussian window sigma=1.5, valid region only.

    Color inputs are reduced to luma first.
    """
    _check_same_shape(a, b)
    ga, gb = to_luma(a), to_luma(b)
    if ga.height < SSIM_WINDOW or ga.width < SSIM_WINDOW:
        raise ValidationError(
            f"image {ga.height}x{ga.width} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"
        )
    return _ssim_plane(
        ga.pixels.astype(np.float64), gb.pixels.astype(np.float64)
    )


def _bef_plane(plane: np.ndarray, block: int) -> float:
    h, w = plane.shape
    # Neighbor-pair squared differences, split into pairs straddling a
    # block boundary and all remaining pairs, pooled over both directions.
    hdiff = np.diff(plane, axis=1) ** 2
    vdiff = np.diff(plane, axis=0) ** 2
    bcols = np.arange(block - 1, w - 1, block)
    brows = np.arange(block - 1, h - 1, block)
    hmask = np.zeros(w - 1, dtype=bool)
    hmask[bcols] = True
    vmask = np.zeros(h - 1, dtype=bool)
    vmask[brows] = True

    boundary_sum = hdiff[:, hmask].sum() + vdiff[vmask, :].sum()
    boundary_n = h * len(bcols) + w * len(brows)
    interior_sum = hdiff[:, ~hmask].sum() + vdiff[~vmask, :].sum()
    interior_n = h * (w - 1 - len(bcols)) + w * (h - 1 - len(brows))
    if boundary_n == 0 or interior_n == 0:
        return 0.0
    d_boundary = boundary_sum / boundary_n
    d_interior = interior_sum / interior_n
    if d_boundary <= d_interior:
        return 0.0
    eta = math.log2(block) / math.log2(min(h, w))
    return float(eta * (d_boundary - d_interior))


def blocking_effect_factor(b: PixelImage, block: int = 8) -> float:
    """Yim-Bovik blocking-effect factor; 0 when boundaries are no worse.

    Color images report the mean of per-channel factors.
    """
    if block < 2:
        raise ValidationError(f"block size must be at least 2, got {block}")
    if b.height < 2 * block or b.width < 2 * block:
        raise ValidationError(
            f"image {b.height}x{b.width} smaller than 2x block size {block}"
        )
    arr = b.pixels.astype(np.float64)
    if b.is_gray:
        return _bef_plane(arr, block)
    return float(np.mean([_bef_plane(arr[..., c], block) for c in range(3)]))


def psnr_b(a: PixelImage, b: PixelImage) -> float:
    """PSNR with BEF of the degraded argument b added to the error term."""
    err = mse(a, b) + blocking_effect_factor(b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / err)


def metric_report(a: PixelImage, b: PixelImage) -> MetricReport:
    """Score a (reference, degraded) pair.

    Color pairs pool MSE/PSNR over RGB samples, evaluate SSIM on luma,
    and add the channel-mean BEF for PSNR-B, so psnr_b <= psnr holds for
    both grayscale and color.
    """
    return MetricReport(
        psnr=psnr(a, b),
        ssim=ssim(a, b),
        psnr_b=psnr_b(a, b),
        mse=mse(a, b),
    )
