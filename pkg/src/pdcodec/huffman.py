"""Canonical Huffman coding of palette index maps.

Only code lengths travel in the bitstream; codes are reassigned canonically
(sorted by length, then symbol) on both sides.  Bits are packed MSB-first
within bytes and the payload is zero-padded to a byte boundary.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import (
    CodingError,
    CorruptionError,
    InvalidInputError,
    TruncationError,
)
from .tensor import _frozen_array

MAX_CODE_LENGTH = 64


@dataclass(frozen=True)
class HuffmanTable:
    """Canonical code lengths per symbol; length 0 marks an absent symbol."""

    lengths: np.ndarray  # (K,) uint8

    def __post_init__(self):
        lengths = _frozen_array(self.lengths, np.uint8)
        if lengths.ndim != 1 or lengths.size < 1:
            raise InvalidInputError("lengths must be a non-empty 1-D array")
        if lengths.max(initial=0) > MAX_CODE_LENGTH:
            raise CodingError(f"code lengths above {MAX_CODE_LENGTH} are not supported")
        if not (lengths > 0).any():
            raise InvalidInputError("at least one symbol must carry a code")
        kraft = sum(2.0 ** -int(l) for l in lengths if l > 0)
        if kraft > 1.0 + 1e-12:
            raise CodingError(f"lengths violate the Kraft inequality (sum {kraft})")
        object.__setattr__(self, "lengths", lengths)

    @property
    def n_symbols(self) -> int:
        return len(self.lengths)

    def codes(self) -> np.ndarray:
        """(K,) canonical code values; meaningful only where length > 0."""
        return _canonical_codes(self.lengths)


def _canonical_codes(lengths: np.ndarray) -> np.ndarray:
    codes = np.zeros(len(lengths), dtype=np.uint64)
    items = sorted((int(l), s) for s, l in enumerate(lengths) if l > 0)
    code = 0
    prev_len = items[0][0]
    for length, sym in items:
        code <<= length - prev_len
        codes[sym] = code
        code += 1
        prev_len = length
    return codes


def huffman_build(freqs) -> HuffmanTable:
    """Optimal prefix-code lengths for the given symbol frequencies.

    Ties are broken by (frequency, symbol id) so the table is deterministic;
    a single-symbol alphabet gets length 1 by convention.
    """
    freqs = np.asarray(freqs, dtype=np.int64)
    if freqs.ndim != 1 or freqs.size == 0:
        raise InvalidInputError("frequencies must be a non-empty 1-D sequence")
    if (freqs < 0).any():
        raise InvalidInputError("frequencies cannot be negative")
    active = [(int(f), s) for s, f in enumerate(freqs) if f > 0]
    if not active:
        raise InvalidInputError("at least one frequency must be nonzero")

    lengths = np.zeros(len(freqs), dtype=np.uint8)
    if len(active) == 1:
        lengths[active[0][1]] = 1
        return HuffmanTable(lengths)

    # Heap items: (freq, tie id, node).  Leaves use their symbol id as the
    # tie id; merged nodes take fresh ids past the alphabet, so equal-weight
    # ties always prefer lower symbols, then earlier merges.
    heap = [(f, s, ("leaf", s)) for f, s in active]
    heapq.heapify(heap)
    next_id = len(freqs)
    while len(heap) > 1:
        f1, _, n1 = heapq.heappop(heap)
        f2, _, n2 = heapq.heappop(heap)
        heapq.heappush(heap, (f1 + f2, next_id, ("node", n1, n2)))
        next_id += 1

    stack = [(heap[0][2], 0)]
    while stack:
        node, depth = stack.pop()
        if node[0] == "leaf":
            lengths[node[1]] = depth
        else:
            stack.append((node[1], depth + 1))
            stack.append((node[2], depth + 1))
    return HuffmanTable(lengths)


def huffman_encode(indices, table: HuffmanTable) -> tuple[bytes, int]:
    """Pack symbols into canonical codes; returns (payload, bits before padding)."""
    syms = np.asarray(getattr(indices, "indices", indices)).reshape(-1)
    if syms.size == 0:
        return b"", 0
    if syms.min() < 0 or syms.max() >= table.n_symbols:
        raise CodingError("symbol outside the table's alphabet")
    lengths = table.lengths.astype(np.int64)[syms]
    if (lengths == 0).any():
        raise CodingError("symbol with no assigned code in the table")
    codes = table.codes()[syms]

    total_bits = int(lengths.sum())
    ends = np.cumsum(lengths)
    starts = ends - lengths
    bits = np.zeros(total_bits, dtype=np.uint8)
    for j in range(int(lengths.max())):
        sel = lengths > j
        shift = (lengths[sel] - 1 - j).astype(np.uint64)
        bits[starts[sel] + j] = (codes[sel] >> shift) & np.uint64(1)
    return np.packbits(bits).tobytes(), total_bits


def huffman_decode(payload: bytes, table: HuffmanTable, n_symbols: int) -> np.ndarray:
    """Decode exactly ``n_symbols`` canonical codes; trailing pad bits are ignored."""
    if n_symbols == 0:
        return np.zeros(0, dtype=np.int32)
    if n_symbols > len(payload) * 8:
        # every code spends at least one bit; refuse before allocating
        raise TruncationError(
            f"{len(payload)} payload bytes cannot hold {n_symbols} symbols"
        )

    lengths = table.lengths
    max_len = int(lengths.max())
    by_code = sorted((int(l), s) for s, l in enumerate(lengths) if l > 0)
    # first_code[l], rank base and symbol ranking for canonical decode
    first_code = {}
    limit_code = {}
    base_rank = {}
    ranked_syms = [s for _, s in by_code]
    code = 0
    prev_len = by_code[0][0]
    rank = 0
    for length, _ in by_code:
        code <<= length - prev_len
        if length not in first_code:
            first_code[length] = code
            base_rank[length] = rank
        limit_code[length] = code + 1
        code += 1
        rank += 1
        prev_len = length

    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8)).tolist()
    out = np.empty(n_symbols, dtype=np.int32)
    pos = 0
    n_bits = len(bits)
    for i in range(n_symbols):
        acc = 0
        length = 0
        while True:
            if pos >= n_bits:
                raise TruncationError(
                    f"bit payload exhausted after {i} of {n_symbols} symbols"
                )
            acc = (acc << 1) | bits[pos]
            pos += 1
            length += 1
            fc = first_code.get(length)
            if fc is not None and fc <= acc < limit_code[length]:
                out[i] = ranked_syms[base_rank[length] + acc - fc]
                break
            if length >= max_len:
                raise CorruptionError(f"invalid prefix at bit {pos - length}")
    return out
