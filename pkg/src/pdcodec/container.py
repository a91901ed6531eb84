"""The .pdc scalable bitstream container.

Layout (all multi-byte integers little-endian):

======================  =====================================================
magic                   4 bytes ``PDC1``
version                 u8, currently 1
width, height           u32 each (source grid of the index map)
channels                u8
K0                      u16 (base palette size)
t                       u16 (severity; palette carried has K0 - t entries)
quantizer mode          u8: 0 = fixed unit range, 1 = per-channel min/max
quantizer params        minmax only: channels x (scale f64, offset f64)
payload lengths         u32 x 3: palette, Huffman table, coded indices
palette payload         (K0 - t) * channels bytes, centroids rounded to u8
table payload           (K0 - t) bytes of canonical code lengths
index payload           Huffman-coded indices, MSB-first, zero-padded
======================  =====================================================

The palette is embedded per image because it is content-adaptive and not
shareable across inputs.  Decoding is lossless down to the u8 palette:
re-encoding a decoded container reproduces the original bytes exactly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .chain import DegradedState, degrade
from .clustering import IndexMap, Palette, PaletteChain
from .errors import ConfigError, FormatError
from .huffman import HuffmanTable, huffman_build, huffman_decode, huffman_encode
from .tensor import (
    MODE_FIXED,
    MODE_MINMAX,
    FeatureTensor,
    QuantizedTensor,
    QuantizerConfig,
    dequantize,
)

MAGIC = b"PDC1"
VERSION = 1

_FIXED_HEADER = struct.Struct("<4sBIIBHHB")
_LENGTHS = struct.Struct("<III")
_QPARAM = struct.Struct("<dd")

_QMODE_CODES = {MODE_FIXED: 0, MODE_MINMAX: 1}
_QMODE_NAMES = {v: k for k, v in _QMODE_CODES.items()}


@dataclass(frozen=True)
class BitstreamHeader:
    """Decoded fixed header of a .pdc container."""

    width: int
    height: int
    channels: int
    k0: int
    severity: int
    quantizer: QuantizerConfig
    palette_len: int
    table_len: int
    indices_len: int

    @property
    def k_t(self) -> int:
        return self.k0 - self.severity


@dataclass(frozen=True)
class EncodedImage:
    """An encoded container split into header and payload parts."""

    header: BitstreamHeader
    palette_payload: bytes
    table_payload: bytes
    index_payload: bytes

    def to_bytes(self) -> bytes:
        h = self.header
        parts = [
            _FIXED_HEADER.pack(
                MAGIC,
                VERSION,
                h.width,
                h.height,
                h.channels,
                h.k0,
                h.severity,
                _QMODE_CODES[h.quantizer.mode],
            )
        ]
        if h.quantizer.mode == MODE_MINMAX:
            for s, o in zip(h.quantizer.scale, h.quantizer.offset):
                parts.append(_QPARAM.pack(s, o))
        parts.append(_LENGTHS.pack(h.palette_len, h.table_len, h.indices_len))
        parts.append(self.palette_payload)
        parts.append(self.table_payload)
        parts.append(self.index_payload)
        return b"".join(parts)

    @property
    def n_bytes(self) -> int:
        base = _FIXED_HEADER.size + _LENGTHS.size
        if self.header.quantizer.mode == MODE_MINMAX:
            base += _QPARAM.size * self.header.channels
        return base + self.header.palette_len + self.header.table_len + self.header.indices_len


def _assemble(
    width: int,
    height: int,
    channels: int,
    k0: int,
    severity: int,
    cfg: QuantizerConfig,
    palette_u8: np.ndarray,
    indices: np.ndarray,
) -> EncodedImage:
    k_t = k0 - severity
    hist = np.bincount(indices.reshape(-1), minlength=k_t)
    table = huffman_build(hist)
    index_payload, _bits = huffman_encode(indices, table)
    palette_payload = palette_u8.astype(np.uint8).tobytes()
    table_payload = table.lengths.tobytes()
    header = BitstreamHeader(
        width=width,
        height=height,
        channels=channels,
        k0=k0,
        severity=severity,
        quantizer=cfg,
        palette_len=len(palette_payload),
        table_len=len(table_payload),
        indices_len=len(index_payload),
    )
    return EncodedImage(header, palette_payload, table_payload, index_payload)


def encode_container(chain: PaletteChain, t: int, cfg: QuantizerConfig) -> EncodedImage:
    """Encode the severity-t state of a chain into a self-contained container.

    Carries the severity-t palette (centroids rounded to u8), a canonical
    Huffman table built from the severity-t index histogram, and the coded
    indices.
    """
    chain.check_severity(t)
    height, width, channels = chain.source_shape
    cfg._check_channels(channels)
    state = degrade(chain, t)
    palette = chain.palette_at(t)
    palette_u8 = np.round(palette.entries).astype(np.uint8)
    return _assemble(
        width, height, channels, chain.k0, t, cfg, palette_u8, state.index_map.indices
    )


@dataclass(frozen=True)
class DecodedImage:
    """Everything recovered from a container.

    This reconstructs the degraded state's observable content (severity,
    palette at that severity, index map); the merge history itself is not
    transmitted, so pairing with a :class:`PaletteChain` for reverse runs is
    the caller's job.
    """

    header: BitstreamHeader
    palette: Palette
    index_map: IndexMap

    @property
    def severity(self) -> int:
        return self.header.severity

    def render_quantized(self) -> QuantizedTensor:
        values = self.palette.entries[self.index_map.indices]
        return QuantizedTensor(values.astype(np.uint8))

    def render_values(self) -> FeatureTensor:
        """The decoded tensor mapped back through the quantizer config."""
        return dequantize(self.render_quantized(), self.header.quantizer)

    def as_state(self, chain: PaletteChain) -> DegradedState:
        """Attach the decoded index map to a chain for reverse processing."""
        return DegradedState(chain=chain, severity=self.severity, index_map=self.index_map)

    def reencode(self) -> EncodedImage:
        h = self.header
        palette_u8 = self.palette.entries.astype(np.uint8)
        return _assemble(
            h.width, h.height, h.channels, h.k0, h.severity, h.quantizer,
            palette_u8, self.index_map.indices,
        )


def _parse_header(data: bytes) -> BitstreamHeader:
    if len(data) < _FIXED_HEADER.size:
        raise FormatError(f"container truncated at byte {len(data)} (fixed header)")
    magic, version, width, height, channels, k0, severity, qmode = _FIXED_HEADER.unpack_from(
        data, 0
    )
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r} at byte 0")
    if version != VERSION:
        raise FormatError(f"unsupported container version {version} at byte 4")
    if min(width, height, channels) < 1:
        raise FormatError(f"invalid dimensions {width}x{height}x{channels}")
    if k0 < 1 or severity > k0 - 1:
        raise FormatError(f"severity {severity} incompatible with K0={k0}")
    offset = _FIXED_HEADER.size
    if qmode == 0:
        cfg = QuantizerConfig.fixed()
    elif qmode == 1:
        need = _QPARAM.size * channels
        if len(data) < offset + need:
            raise FormatError(f"container truncated at byte {len(data)} (quantizer params)")
        scale = np.empty(channels)
        off = np.empty(channels)
        for c in range(channels):
            scale[c], off[c] = _QPARAM.unpack_from(data, offset + c * _QPARAM.size)
        offset += need
        try:
            cfg = QuantizerConfig(MODE_MINMAX, scale=scale, offset=off)
        except ConfigError as exc:
            raise FormatError(f"bad quantizer parameters: {exc}") from exc
    else:
        raise FormatError(f"unknown quantizer mode byte {qmode}")
    if len(data) < offset + _LENGTHS.size:
        raise FormatError(f"container truncated at byte {len(data)} (payload lengths)")
    palette_len, table_len, indices_len = _LENGTHS.unpack_from(data, offset)
    return BitstreamHeader(
        width=width,
        height=height,
        channels=channels,
        k0=k0,
        severity=severity,
        quantizer=cfg,
        palette_len=palette_len,
        table_len=table_len,
        indices_len=indices_len,
    )


def _header_size(header: BitstreamHeader) -> int:
    base = _FIXED_HEADER.size + _LENGTHS.size
    if header.quantizer.mode == MODE_MINMAX:
        base += _QPARAM.size * header.channels
    return base


def decode_container(data: bytes) -> DecodedImage:
    """Parse and entropy-decode a .pdc container.

    Raises :class:`FormatError` (with the offending byte offset where it is
    knowable) for structural damage and the coding errors from
    :mod:`pdcodec.huffman` for bad index payloads.
    """
    header = _parse_header(data)
    k_t = header.k_t
    start = _header_size(header)
    expected = start + header.palette_len + header.table_len + header.indices_len
    if len(data) != expected:
        raise FormatError(
            f"container is {len(data)} bytes, header promises {expected}"
        )
    if header.palette_len != k_t * header.channels:
        raise FormatError(
            f"palette payload is {header.palette_len} bytes, expected {k_t * header.channels}"
        )
    if header.table_len != k_t:
        raise FormatError(f"table payload is {header.table_len} bytes, expected {k_t}")

    palette_u8 = np.frombuffer(data, dtype=np.uint8, count=header.palette_len, offset=start)
    entries = palette_u8.reshape(k_t, header.channels).astype(np.float64)
    start += header.palette_len
    lengths = np.frombuffer(data, dtype=np.uint8, count=header.table_len, offset=start)
    start += header.table_len
    try:
        table = HuffmanTable(lengths.copy())
    except Exception as exc:
        raise FormatError(f"bad Huffman table: {exc}") from exc
    payload = data[start : start + header.indices_len]

    n_cells = header.width * header.height
    symbols = huffman_decode(payload, table, n_cells)
    indices = IndexMap(symbols.reshape(header.height, header.width))
    sizes = np.bincount(symbols, minlength=k_t).astype(np.int64)
    palette = Palette(entries=entries, sizes=sizes)
    return DecodedImage(header=header, palette=palette, index_map=indices)
