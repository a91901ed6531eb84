"""Shared oracles and fixtures.

Everything here recomputes expected values by definition (enumeration,
direct summation), independent of the library's own code paths.
"""

from fractions import Fraction

import numpy as np
import pytest

from pdcodec import QuantizedTensor


def tensor_1d(values) -> QuantizedTensor:
    """A (1, n, 1) quantized tensor from a list of small ints."""
    arr = np.asarray(values, dtype=np.uint8).reshape(1, -1, 1)
    return QuantizedTensor(arr)


def iter_partitions(n: int, k: int):
    """All partitions of range(n) into exactly k non-empty blocks.

    Yields label tuples in restricted-growth form (block ids appear in
    first-use order), which enumerates every set partition exactly once.
    """

    def rec(i, labels, used):
        if i == n:
            if used == k:
                yield tuple(labels)
            return
        # pruning: remaining items must still be able to open k blocks
        if used + (n - i) < k:
            return
        for lab in range(min(used + 1, k)):
            labels.append(lab)
            yield from rec(i + 1, labels, max(used, lab + 1))
            labels.pop()

    yield from rec(0, [], 0)


def exact_partition_sse(values, labels, k) -> Fraction:
    """Exact SSE of a labeled partition: sum_k (n*sum(x^2) - sum(x)^2) / n."""
    total = Fraction(0)
    for block in range(k):
        xs = [Fraction(v) for v, l in zip(values, labels) if l == block]
        n = len(xs)
        s1 = sum(xs)
        s2 = sum(x * x for x in xs)
        total += Fraction(n * s2 - s1 * s1, n)
    return total


def brute_force_optimal_sse(values, k) -> Fraction:
    """Global SSE optimum by full enumeration of all k-block partitions."""
    best = None
    for labels in iter_partitions(len(values), k):
        sse = exact_partition_sse(values, labels, k)
        if best is None or sse < best:
            best = sse
    return best


def direct_dft2(channel: np.ndarray) -> np.ndarray:
    """O(N^4) direct-summation 2-D DFT of one channel."""
    h, w = channel.shape
    out = np.zeros((h, w), dtype=np.complex128)
    for k in range(h):
        for l in range(w):
            acc = 0.0 + 0.0j
            for p in range(h):
                for q in range(w):
                    acc += channel[p, q] * np.exp(-2j * np.pi * (k * p / h + l * q / w))
            out[k, l] = acc
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
