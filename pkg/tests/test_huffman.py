import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdcodec import (
    CodingError,
    CorruptionError,
    HuffmanTable,
    InvalidInputError,
    TruncationError,
    huffman_build,
    huffman_decode,
    huffman_encode,
)


class TestBuild:
    def test_single_symbol_gets_length_one(self):
        table = huffman_build([0, 9, 0])
        assert table.lengths.tolist() == [0, 1, 0]

    def test_textbook_example(self):
        # freqs {A:5, B:2, C:1, D:1}: merge C+D (2), merge B+CD (4), merge A.
        table = huffman_build([5, 2, 1, 1])
        assert table.lengths.tolist() == [1, 2, 3, 3]
        total_bits = sum(f * l for f, l in zip([5, 2, 1, 1], table.lengths))
        assert total_bits == 15

    def test_uniform_four_symbols(self):
        table = huffman_build([3, 3, 3, 3])
        assert table.lengths.tolist() == [2, 2, 2, 2]

    def test_empty_or_zero_frequencies_rejected(self):
        with pytest.raises(InvalidInputError):
            huffman_build([])
        with pytest.raises(InvalidInputError):
            huffman_build([0, 0])

    def test_kraft_inequality_holds(self, rng):
        for _ in range(50):
            freqs = rng.integers(0, 1000, size=int(rng.integers(1, 40)))
            if freqs.sum() == 0:
                continue
            table = huffman_build(freqs)
            kraft = sum(2.0 ** -int(l) for l in table.lengths if l > 0)
            assert kraft <= 1.0 + 1e-12

    def test_deterministic_tie_break(self):
        a = huffman_build([2, 2, 2, 2, 2])
        b = huffman_build([2, 2, 2, 2, 2])
        assert a.lengths.tolist() == b.lengths.tolist()

    def test_canonical_codes_are_prefix_free(self, rng):
        for _ in range(25):
            freqs = rng.integers(1, 50, size=int(rng.integers(2, 20)))
            table = huffman_build(freqs)
            codes = table.codes()
            bitstrings = [
                format(int(c), "0{}b".format(int(l)))
                for c, l in zip(codes, table.lengths)
                if l > 0
            ]
            for i, s in enumerate(bitstrings):
                for j, t in enumerate(bitstrings):
                    if i != j:
                        assert not t.startswith(s)


class TestEncodeDecode:
    def test_textbook_bit_count(self):
        table = huffman_build([5, 2, 1, 1])
        symbols = np.array([0] * 5 + [1] * 2 + [2, 3])
        payload, n_bits = huffman_encode(symbols, table)
        assert n_bits == 15
        assert len(payload) == 2  # 15 bits zero-padded to 2 bytes

    def test_empty_map_gives_empty_payload(self):
        table = huffman_build([1, 1])
        payload, n_bits = huffman_encode(np.zeros(0, dtype=np.int32), table)
        assert payload == b"" and n_bits == 0

    def test_uncovered_symbol_is_coding_error(self):
        table = huffman_build([5, 0, 3])  # symbol 1 has no code
        with pytest.raises(CodingError):
            huffman_encode(np.array([0, 1]), table)
        with pytest.raises(CodingError):
            huffman_encode(np.array([0, 7]), table)

    def test_round_trip_random_maps(self, rng):
        for _ in range(30):
            k = int(rng.integers(1, 30))
            n = int(rng.integers(1, 400))
            symbols = rng.integers(0, k, size=n)
            freqs = np.bincount(symbols, minlength=k)
            table = huffman_build(freqs)
            payload, _ = huffman_encode(symbols, table)
            decoded = huffman_decode(payload, table, n)
            assert np.array_equal(decoded, symbols)

    def test_truncated_payload_raises(self):
        table = huffman_build([4, 3, 2, 1])
        symbols = np.array([0, 1, 2, 3] * 10)
        payload, _ = huffman_encode(symbols, table)
        with pytest.raises(TruncationError):
            huffman_decode(payload[:-1], table, len(symbols))

    def test_invalid_prefix_raises_corruption(self):
        # single-symbol table: only '0' is a valid code; a 1 bit cannot decode
        table = huffman_build([7])
        with pytest.raises(CorruptionError):
            huffman_decode(b"\xff", table, 1)

    def test_msb_first_packing(self):
        # uniform 4-symbol table: canonical codes 00, 01, 10, 11
        table = huffman_build([1, 1, 1, 1])
        payload, n_bits = huffman_encode(np.array([0, 1, 2, 3]), table)
        assert n_bits == 8
        assert payload == bytes([0b00011011])

    def test_single_symbol_stream_is_one_bit_per_cell(self):
        table = huffman_build([12])
        payload, n_bits = huffman_encode(np.zeros(12, dtype=np.int64), table)
        assert n_bits == 12
        assert payload == bytes([0x00, 0x00])
        assert np.array_equal(huffman_decode(payload, table, 12), np.zeros(12))


class TestEntropyBounds:
    def test_huffman_within_one_bit_of_entropy(self, rng):
        for _ in range(60):
            k = int(rng.integers(1, 24))
            n = int(rng.integers(1, 300))
            symbols = rng.integers(0, k, size=n)
            freqs = np.bincount(symbols, minlength=k)
            table = huffman_build(freqs)
            bits = int(sum(f * l for f, l in zip(freqs, table.lengths)))
            p = freqs[freqs > 0] / n
            entropy = float(-(p * np.log2(p)).sum())
            assert n * entropy - 1e-6 <= bits <= n * (entropy + 1.0) + 1e-6


class TestTableValidation:
    def test_kraft_violation_rejected(self):
        with pytest.raises(CodingError):
            HuffmanTable(np.array([1, 1, 1], dtype=np.uint8))

    def test_all_zero_lengths_rejected(self):
        with pytest.raises(InvalidInputError):
            HuffmanTable(np.array([0, 0], dtype=np.uint8))


@given(st.lists(st.integers(min_value=0, max_value=12), min_size=1, max_size=600))
@settings(max_examples=60, deadline=None)
def test_round_trip_property(symbol_list):
    symbols = np.asarray(symbol_list)
    freqs = np.bincount(symbols, minlength=13)
    table = huffman_build(freqs)
    payload, n_bits = huffman_encode(symbols, table)
    assert len(payload) == math.ceil(n_bits / 8)
    assert np.array_equal(huffman_decode(payload, table, len(symbols)), symbols)
