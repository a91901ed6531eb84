"""Dense (H, W, C) tensors and the float <-> uint8 quantization operators.

The codec's universal payload is a real-valued tensor laid out row-major as
(height, width, channels); image pixels and latent feature maps are treated
identically.  Quantization maps floats onto the 8-bit unsigned grid either
from a fixed [0, 1] range or with per-channel min/max affine parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvalidInputError, RangeError

MODE_FIXED = "fixed"
MODE_MINMAX = "minmax"


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True, order="C")
    arr.setflags(write=False)
    return arr


def _check_hwc(arr: np.ndarray) -> None:
    if arr.ndim != 3:
        raise InvalidInputError(
            f"expected a (height, width, channels) array, got shape {arr.shape}"
        )
    if min(arr.shape) < 1:
        raise InvalidInputError(f"all dimensions must be >= 1, got shape {arr.shape}")


@dataclass(frozen=True)
class FeatureTensor:
    """Real-valued (H, W, C) tensor with finite entries.

    The backing array is copied and marked read-only so instances can be
    shared freely across threads.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.data, np.float64)
        _check_hwc(arr)
        if not np.isfinite(arr).all():
            raise InvalidInputError("tensor contains NaN or infinite values")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def cells(self) -> np.ndarray:
        """View of the tensor as (H*W, C) row-major cell vectors."""
        return self.data.reshape(-1, self.channels)


@dataclass(frozen=True)
class QuantizedTensor:
    """(H, W, C) tensor of integers in [0, 255]."""

    data: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.data)
        if raw.dtype != np.uint8:
            if not np.issubdtype(raw.dtype, np.integer):
                raise InvalidInputError("quantized tensor requires integer data")
            if raw.size and (raw.min() < 0 or raw.max() > 255):
                raise RangeError("quantized values must lie in [0, 255]")
        arr = _frozen_array(raw, np.uint8)
        _check_hwc(arr)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def cells(self) -> np.ndarray:
        return self.data.reshape(-1, self.channels)

    def as_float(self) -> FeatureTensor:
        """The same values as a float tensor (still on the [0, 255] grid)."""
        return FeatureTensor(self.data.astype(np.float64))


@dataclass(frozen=True)
class QuantizerConfig:
    """Affine parameters of the float <-> uint8 mapping.

    ``fixed`` mode assumes inputs already live in [0, 1] and needs no
    parameters.  ``minmax`` mode carries one (scale, offset) pair per
    channel; a value v maps to round((v - offset) / scale * 255).
    """

    mode: str
    scale: np.ndarray | None = None
    offset: np.ndarray | None = None

    def __post_init__(self):
        if self.mode not in (MODE_FIXED, MODE_MINMAX):
            raise ConfigError(f"unknown quantizer mode {self.mode!r}")
        if self.mode == MODE_FIXED:
            if self.scale is not None or self.offset is not None:
                raise ConfigError("fixed mode takes no scale/offset parameters")
            return
        if self.scale is None or self.offset is None:
            raise ConfigError("minmax mode requires per-channel scale and offset")
        scale = _frozen_array(self.scale, np.float64)
        offset = _frozen_array(self.offset, np.float64)
        if scale.ndim != 1 or offset.shape != scale.shape:
            raise ConfigError("scale and offset must be 1-D arrays of equal length")
        if not (np.isfinite(scale).all() and np.isfinite(offset).all()):
            raise ConfigError("scale and offset must be finite")
        if (scale <= 0).any():
            raise ConfigError("every channel scale must be > 0")
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "offset", offset)

    @property
    def channels(self) -> int | None:
        return None if self.scale is None else len(self.scale)

    @classmethod
    def fixed(cls) -> "QuantizerConfig":
        return cls(MODE_FIXED)

    @classmethod
    def minmax_from(cls, z: FeatureTensor) -> "QuantizerConfig":
        """Per-channel min/max parameters fitted to ``z``.

        A constant channel gets scale 1 so the invariant scale > 0 holds;
        its values quantize to 0 and dequantize back to the channel minimum.
        """
        lo = z.data.min(axis=(0, 1))
        hi = z.data.max(axis=(0, 1))
        scale = hi - lo
        scale[scale == 0] = 1.0
        return cls(MODE_MINMAX, scale=scale, offset=lo)

    def _check_channels(self, channels: int) -> None:
        if self.mode == MODE_MINMAX and len(self.scale) != channels:
            raise ConfigError(
                f"quantizer has {len(self.scale)} channels, tensor has {channels}"
            )


def quantize(z: FeatureTensor, cfg: QuantizerConfig) -> QuantizedTensor:
    """Map a float tensor onto the uint8 grid.

    Rounding is round-half-to-even; results are clamped to [0, 255].  In
    fixed mode, values outside [0, 1] raise :class:`RangeError`.
    """
    cfg._check_channels(z.channels)
    if cfg.mode == MODE_FIXED:
        if z.data.min() < 0.0 or z.data.max() > 1.0:
            raise RangeError("fixed mode requires all values in [0, 1]")
        unit = z.data
    else:
        unit = (z.data - cfg.offset) / cfg.scale
    q = np.round(unit * 255.0)
    np.clip(q, 0.0, 255.0, out=q)
    return QuantizedTensor(q.astype(np.uint8))


def dequantize(q: QuantizedTensor, cfg: QuantizerConfig) -> FeatureTensor:
    """Invert :func:`quantize`: integer k maps to k/255 * scale + offset."""
    cfg._check_channels(q.channels)
    unit = q.data.astype(np.float64) / 255.0
    if cfg.mode == MODE_FIXED:
        return FeatureTensor(unit)
    return FeatureTensor(unit * cfg.scale + cfg.offset)
