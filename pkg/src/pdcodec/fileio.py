"""Image and raw tensor file I/O.

PNG covers 8-bit RGB imagery (alpha is dropped with a warning).  FTEN is
this package's raw float tensor format for externally produced feature
maps: magic ``FTEN``, a version byte, H/W/C as little-endian u32, then
row-major (H, W, C) little-endian float32 data.
"""

from __future__ import annotations

import struct
import warnings
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FormatError, InvalidInputError
from .tensor import FeatureTensor, QuantizedTensor

FTEN_MAGIC = b"FTEN"
FTEN_VERSION = 1
_FTEN_HEADER = struct.Struct("<4sBIII")


def read_image(path: str | Path) -> QuantizedTensor:
    """Load an 8-bit image as a quantized tensor; RGBA drops alpha with a warning."""
    try:
        with Image.open(path) as img:
            if img.mode == "RGBA":
                warnings.warn(f"{path}: alpha channel dropped", stacklevel=2)
                img = img.convert("RGB")
            elif img.mode not in ("RGB", "L"):
                img = img.convert("RGB")
            arr = np.asarray(img, dtype=np.uint8)
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError) as exc:
        raise FormatError(f"{path}: not a readable image ({exc})") from exc
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return QuantizedTensor(arr)


def write_image(path: str | Path, q: QuantizedTensor) -> None:
    """Write a 1- or 3-channel quantized tensor as an 8-bit PNG."""
    if q.channels == 1:
        img = Image.fromarray(q.data[:, :, 0], mode="L")
    elif q.channels == 3:
        img = Image.fromarray(q.data, mode="RGB")
    else:
        raise FormatError(f"PNG output supports 1 or 3 channels, got {q.channels}")
    img.save(path, format="PNG")


def read_ften(path: str | Path) -> FeatureTensor:
    """Load an FTEN tensor file."""
    data = Path(path).read_bytes()
    if len(data) < _FTEN_HEADER.size:
        raise FormatError(f"{path}: truncated FTEN header ({len(data)} bytes)")
    magic, version, h, w, c = _FTEN_HEADER.unpack_from(data, 0)
    if magic != FTEN_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r} at byte 0")
    if version != FTEN_VERSION:
        raise FormatError(f"{path}: unsupported FTEN version {version}")
    if min(h, w, c) < 1:
        raise FormatError(f"{path}: invalid dimensions {h}x{w}x{c}")
    expected = _FTEN_HEADER.size + 4 * h * w * c
    if len(data) != expected:
        raise FormatError(
            f"{path}: payload is {len(data)} bytes, expected {expected} for {h}x{w}x{c}"
        )
    values = np.frombuffer(data, dtype="<f4", offset=_FTEN_HEADER.size)
    try:
        return FeatureTensor(values.astype(np.float64).reshape(h, w, c))
    except InvalidInputError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_ften(path: str | Path, z: FeatureTensor) -> None:
    """Write a tensor as FTEN (float32 on disk; exact for f32-representable data)."""
    header = _FTEN_HEADER.pack(FTEN_MAGIC, FTEN_VERSION, z.height, z.width, z.channels)
    Path(path).write_bytes(header + z.data.astype("<f4").tobytes())
