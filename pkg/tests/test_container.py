import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdcodec import (
    FormatError,
    QuantizedTensor,
    QuantizerConfig,
    build_merge_chain,
    decode_container,
    encode_container,
    kmeans_palette,
)
from pdcodec.chain import degrade, render_values


def chain_for(q, k, seed=0):
    palette, imap = kmeans_palette(q, k, seed=seed)
    return build_merge_chain(palette, imap)


def random_tensor(rng, shape=(9, 13, 3)):
    return QuantizedTensor(rng.integers(0, 256, size=shape, dtype=np.uint8))


class TestRoundTrip:
    def test_decode_reproduces_u8_rounded_rendering(self, rng):
        q = random_tensor(rng)
        chain = chain_for(q, 7)
        for t in (0, 3, 6):
            blob = encode_container(chain, t, QuantizerConfig.fixed()).to_bytes()
            decoded = decode_container(blob)
            rendering = render_values(degrade(chain, t)).data
            expected = np.round(rendering).astype(np.uint8)
            assert np.array_equal(decoded.render_quantized().data, expected)
            assert np.array_equal(
                decoded.index_map.indices, chain.index_map_at(t).indices
            )

    def test_decode_is_bit_exact_on_integral_centroids(self):
        # centroids 5 and 205 are integers, so decode == rendering exactly
        q = QuantizedTensor(np.array([0, 10, 200, 210], dtype=np.uint8).reshape(1, 4, 1))
        chain = chain_for(q, 2)
        blob = encode_container(chain, 0, QuantizerConfig.fixed()).to_bytes()
        decoded = decode_container(blob)
        rendering = render_values(degrade(chain, 0)).data
        assert np.array_equal(decoded.render_quantized().data.astype(np.float64), rendering)

    def test_reencode_is_byte_identical(self, rng):
        q = random_tensor(rng)
        chain = chain_for(q, 6)
        blob = encode_container(chain, 2, QuantizerConfig.fixed()).to_bytes()
        assert decode_container(blob).reencode().to_bytes() == blob

    def test_header_fields(self, rng):
        q = random_tensor(rng, shape=(5, 11, 2))
        chain = chain_for(q, 6)
        decoded = decode_container(encode_container(chain, 2, QuantizerConfig.fixed()).to_bytes())
        h = decoded.header
        assert (h.width, h.height, h.channels) == (11, 5, 2)
        assert (h.k0, h.severity, h.k_t) == (6, 2, 4)

    def test_minmax_parameters_round_trip_exactly(self, rng):
        q = random_tensor(rng, shape=(6, 6, 3))
        chain = chain_for(q, 5)
        cfg = QuantizerConfig(
            "minmax",
            scale=np.array([0.1, 2.5, 31.25]),
            offset=np.array([-4.0, 0.0, 1e6]),
        )
        decoded = decode_container(encode_container(chain, 1, cfg).to_bytes())
        assert decoded.header.quantizer.mode == "minmax"
        assert np.array_equal(decoded.header.quantizer.scale, cfg.scale)
        assert np.array_equal(decoded.header.quantizer.offset, cfg.offset)

    def test_single_entry_palette_codes_one_bit_per_cell(self, rng):
        q = random_tensor(rng, shape=(7, 9, 1))
        chain = chain_for(q, 4)
        enc = encode_container(chain, 3, QuantizerConfig.fixed())  # K_t = 1
        assert enc.header.indices_len == math.ceil(7 * 9 / 8)

    def test_dequantized_values(self, rng):
        q = random_tensor(rng, shape=(4, 4, 1))
        chain = chain_for(q, 3)
        decoded = decode_container(encode_container(chain, 0, QuantizerConfig.fixed()).to_bytes())
        values = decoded.render_values()
        assert np.array_equal(values.data, decoded.render_quantized().data / 255.0)


class TestCorruptionHandling:
    def make_blob(self, rng):
        q = random_tensor(rng, shape=(4, 6, 2))
        return encode_container(chain_for(q, 4), 1, QuantizerConfig.fixed()).to_bytes()

    def test_tampered_magic(self, rng):
        blob = bytearray(self.make_blob(rng))
        blob[0] = ord("X")
        with pytest.raises(FormatError, match="magic"):
            decode_container(bytes(blob))

    def test_bad_version(self, rng):
        blob = bytearray(self.make_blob(rng))
        blob[4] = 99
        with pytest.raises(FormatError, match="version"):
            decode_container(bytes(blob))

    def test_truncated_container(self, rng):
        blob = self.make_blob(rng)
        with pytest.raises(FormatError):
            decode_container(blob[: len(blob) - 3])

    def test_severity_beyond_k0(self, rng):
        blob = bytearray(self.make_blob(rng))
        # severity field is the u16 at offset 16 (4s B I I B H H B layout)
        blob[16:18] = (1000).to_bytes(2, "little")
        with pytest.raises(FormatError):
            decode_container(bytes(blob))

    def test_empty_input(self):
        with pytest.raises(FormatError):
            decode_container(b"")

    def test_random_corruption_always_raises_codec_errors(self, rng):
        # byte flips may decode to other valid content, but must never leak
        # uncategorized exceptions or attempt absurd allocations
        from pdcodec import CodecError

        blob = bytearray(self.make_blob(rng))
        for _ in range(400):
            corrupted = bytearray(blob)
            for _ in range(int(rng.integers(1, 5))):
                corrupted[int(rng.integers(len(corrupted)))] = int(rng.integers(256))
            try:
                decode_container(bytes(corrupted))
            except CodecError:
                pass

    def test_huge_dims_with_tiny_payload_rejected_cheaply(self, rng):
        blob = bytearray(self.make_blob(rng))
        blob[5:9] = (2**31).to_bytes(4, "little")  # width field
        from pdcodec import CodecError

        with pytest.raises(CodecError):
            decode_container(bytes(blob))


class TestRateMonotonicity:
    def test_bpp_non_increasing_in_severity(self, rng):
        sources = [
            random_tensor(rng, shape=(16, 16, 3)),
            QuantizedTensor(
                np.linspace(0, 255, 16 * 16 * 3).astype(np.uint8).reshape(16, 16, 3)
            ),
        ]
        for q in sources:
            chain = chain_for(q, 10)
            sizes = [
                encode_container(chain, t, QuantizerConfig.fixed()).n_bytes
                for t in range(chain.k0)
            ]
            assert all(b <= a for a, b in zip(sizes, sizes[1:]))

    def test_n_bytes_matches_serialization(self, rng):
        q = random_tensor(rng)
        chain = chain_for(q, 5)
        enc = encode_container(chain, 2, QuantizerConfig.fixed())
        assert enc.n_bytes == len(enc.to_bytes())

    def test_round_trip_property(self):
        @given(
            st.integers(min_value=0, max_value=2**32 - 1),
            st.integers(min_value=2, max_value=9),
            st.integers(min_value=1, max_value=10),
            st.integers(min_value=1, max_value=10),
            st.integers(min_value=1, max_value=4),
        )
        @settings(max_examples=40, deadline=None)
        def check(seed, k0, h, w, c):
            rng = np.random.default_rng(seed)
            q = QuantizedTensor(rng.integers(0, 256, size=(h, w, c), dtype=np.uint8))
            try:
                palette, imap = kmeans_palette(q, k0, seed=seed % 997)
            except Exception:
                return  # fewer distinct cells than k0
            chain = build_merge_chain(palette, imap)
            for t in (0, chain.max_severity):
                blob = encode_container(chain, t, QuantizerConfig.fixed()).to_bytes()
                decoded = decode_container(blob)
                assert decoded.reencode().to_bytes() == blob
                rendering = render_values(degrade(chain, t)).data
                assert np.array_equal(
                    decoded.render_quantized().data, np.round(rendering).astype(np.uint8)
                )

        check()

    def test_index_payload_within_entropy_bounds(self, rng):
        q = random_tensor(rng, shape=(24, 24, 3))
        k0 = 9
        chain = chain_for(q, k0)
        for t in range(k0):
            enc = encode_container(chain, t, QuantizerConfig.fixed())
            hist = np.bincount(
                chain.index_map_at(t).indices.reshape(-1), minlength=k0 - t
            )
            n = int(hist.sum())
            p = hist[hist > 0] / n
            entropy = float(-(p * np.log2(p)).sum())
            bits = enc.header.indices_len * 8
            # Huffman redundancy bound, plus up to 7 bits of byte padding
            assert n * entropy - 1e-9 <= bits <= n * (entropy + 1.0) + 7 + 1e-9
