"""Signal-fidelity metrics: PSNR, single-scale SSIM, and bits per pixel."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import InsufficientDataError, InvalidInputError
from .tensor import QuantizedTensor

PSNR_CAP_DB = 100.0
SSIM_WINDOW = 8
_C1 = (0.01 * 255.0) ** 2
_C2 = (0.03 * 255.0) ** 2


class PsnrResult(NamedTuple):
    db: float
    identical: bool


def compute_psnr(a: QuantizedTensor, b: QuantizedTensor) -> PsnrResult:
    """10*log10(255^2 / MSE); identical inputs report the 100 dB sentinel."""
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = a.data.astype(np.float64) - b.data.astype(np.float64)
    mse = float((diff**2).mean())
    if mse == 0.0:
        return PsnrResult(PSNR_CAP_DB, True)
    return PsnrResult(10.0 * math.log10(255.0**2 / mse), False)


def _window_means(x: np.ndarray, w: int) -> np.ndarray:
    """Mean over every w-by-w window (stride 1, valid placement) via integral sums."""
    cs = np.zeros((x.shape[0] + 1, x.shape[1] + 1), dtype=np.float64)
    cs[1:, 1:] = x.cumsum(axis=0).cumsum(axis=1)
    sums = cs[w:, w:] - cs[:-w, w:] - cs[w:, :-w] + cs[:-w, :-w]
    return sums / (w * w)


def compute_ssim(a: QuantizedTensor, b: QuantizedTensor, window: int = SSIM_WINDOW) -> float:
    """Single-scale SSIM with a uniform sliding window.

    Means, variances (population moments) and covariance are taken over
    every window placement per channel; the SSIM map is averaged over
    windows, then over channels.
    """
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.height < window or a.width < window:
        raise InsufficientDataError(
            f"images must be at least {window}x{window}, got {a.height}x{a.width}"
        )
    per_channel = np.empty(a.channels, dtype=np.float64)
    for c in range(a.channels):
        xa = a.data[:, :, c].astype(np.float64)
        xb = b.data[:, :, c].astype(np.float64)
        mu_a = _window_means(xa, window)
        mu_b = _window_means(xb, window)
        var_a = _window_means(xa * xa, window) - mu_a * mu_a
        var_b = _window_means(xb * xb, window) - mu_b * mu_b
        cov = _window_means(xa * xb, window) - mu_a * mu_b
        num = (2.0 * mu_a * mu_b + _C1) * (2.0 * cov + _C2)
        den = (mu_a * mu_a + mu_b * mu_b + _C1) * (var_a + var_b + _C2)
        per_channel[c] = float((num / den).mean())
    return float(per_channel.mean())


def compute_bpp(container_bytes: int, width: int, height: int) -> float:
    """Bits per pixel of the ORIGINAL image, counting the whole container."""
    if width < 1 or height < 1:
        raise InvalidInputError(f"invalid source dimensions {width}x{height}")
    if container_bytes < 0:
        raise InvalidInputError("container size cannot be negative")
    return 8.0 * container_bytes / (width * height)
