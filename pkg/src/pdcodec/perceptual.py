"""Spectral perceptual tooling: magnitude spectra, the cosine-style distance
over them, patch pseudo-labels, and the InfoNCE evaluation loss.

Magnitude spectra decouple texture content from spatial position (circular
shifts leave them unchanged), which is what makes them usable as a
perceptual coordinate system for clustering patches.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .clustering import lloyd
from .errors import (
    ConfigError,
    DegenerateInputError,
    InfeasibleError,
    InvalidInputError,
)
from .tensor import FeatureTensor, _frozen_array


@dataclass(frozen=True)
class SpectrumMatrix:
    """Per-channel (H, W, C) non-negative magnitude values."""

    mags: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.mags, np.float64)
        if arr.ndim != 3:
            raise InvalidInputError(f"spectrum must be (H, W, C), got {arr.shape}")
        if not np.isfinite(arr).all() or (arr < 0).any():
            raise InvalidInputError("spectrum magnitudes must be finite and >= 0")
        object.__setattr__(self, "mags", arr)


def dft2_magnitude(x: FeatureTensor) -> SpectrumMatrix:
    """Per-channel 2-D DFT magnitude, exponent -i*2*pi*(k*p/H + l*q/W)."""
    return SpectrumMatrix(np.abs(np.fft.fft2(x.data, axes=(0, 1))))


def _as_layers(x) -> list[SpectrumMatrix]:
    if isinstance(x, SpectrumMatrix):
        return [x]
    layers = list(x)
    if not layers:
        raise InvalidInputError("need at least one spectrum layer")
    return layers


def perceptual_similarity(a, b) -> float:
    """Normalized correlation of magnitude spectra across layers, in [0, 1].

    Accepts a single :class:`SpectrumMatrix` or a sequence of them (one per
    feature layer); layer counts and shapes must match pairwise.  The value
    is clamped to [0, 1]: non-negative spectra keep it there mathematically
    (Cauchy-Schwarz), the clamp only strips float rounding excursions.
    """
    la, lb = _as_layers(a), _as_layers(b)
    if len(la) != len(lb):
        raise InvalidInputError(f"layer counts differ: {len(la)} vs {len(lb)}")
    num = 0.0
    norm_a = 0.0
    norm_b = 0.0
    for i, (sa, sb) in enumerate(zip(la, lb)):
        if sa.mags.shape != sb.mags.shape:
            raise InvalidInputError(f"layer {i} shapes differ: {sa.mags.shape} vs {sb.mags.shape}")
        num += float((sa.mags * sb.mags).sum())
        norm_a += float((sa.mags**2).sum())
        norm_b += float((sb.mags**2).sum())
    if norm_a == 0.0 or norm_b == 0.0:
        raise DegenerateInputError("zero-norm spectrum has no defined similarity")
    return min(1.0, max(0.0, num / (np.sqrt(norm_a) * np.sqrt(norm_b))))


def perceptual_distance(a, b) -> float:
    """1 - similarity: zero for identical spectra, at most one."""
    return 1.0 - perceptual_similarity(a, b)


def extract_patches(x: FeatureTensor, n: int) -> list[FeatureTensor]:
    """Non-overlapping n-by-n tiles in row-major order; remainders dropped.

    When the patch side exceeds an image dimension no tiles fit; an empty
    list is returned and a warning is emitted.
    """
    if n < 1:
        raise InvalidInputError(f"patch side must be >= 1, got {n}")
    rows, cols = x.height // n, x.width // n
    if rows == 0 or cols == 0:
        warnings.warn(
            f"patch side {n} exceeds image dimensions {x.height}x{x.width}; no patches",
            stacklevel=2,
        )
        return []
    out = []
    for r in range(rows):
        for c in range(cols):
            out.append(FeatureTensor(x.data[r * n : (r + 1) * n, c * n : (c + 1) * n, :]))
    return out


@dataclass(frozen=True)
class PseudoLabelSet:
    """Self-supervised cluster assignment of patches in spectrum space."""

    n_patches: int
    k: int
    labels: np.ndarray  # (n_patches,) int32 in [0, k)
    centroids: np.ndarray  # (k, D) descriptors in unit-spectrum space
    sse: float

    def __post_init__(self):
        labels = _frozen_array(self.labels, np.int32)
        centroids = _frozen_array(self.centroids, np.float64)
        if labels.shape != (self.n_patches,):
            raise InvalidInputError("one label per patch required")
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise InvalidInputError("labels must lie in [0, k)")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "centroids", centroids)


def _unit_spectrum_vectors(patches: Sequence[FeatureTensor]) -> np.ndarray:
    shape = patches[0].shape
    vecs = np.empty((len(patches), int(np.prod(shape))), dtype=np.float64)
    for i, p in enumerate(patches):
        if p.shape != shape:
            raise InvalidInputError("all patches must share one shape")
        v = dft2_magnitude(p).mags.reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise DegenerateInputError(f"patch {i} has a zero spectrum")
        vecs[i] = v / norm
    return vecs


def generate_pseudo_labels(
    patches: Sequence[FeatureTensor], k: int, seed: int = 0, max_iters: int = 100
) -> PseudoLabelSet:
    """Cluster patches by their unit-normalized magnitude spectra.

    On unit vectors, squared Euclidean distance is an exact monotone stand-in
    for the spectral perceptual distance (d = ||u - v||^2 / 2), so plain
    k-means in this space clusters by perceptual similarity.
    """
    if not patches:
        raise InvalidInputError("no patches to label")
    if k < 1:
        raise InvalidInputError(f"k must be >= 1, got {k}")
    if k > len(patches):
        raise InfeasibleError(f"k={k} exceeds the {len(patches)} available patches")
    vecs = _unit_spectrum_vectors(patches)
    n_distinct = len(np.unique(vecs, axis=0))
    if k > n_distinct:
        raise InfeasibleError(f"k={k} exceeds the {n_distinct} distinct patch spectra")
    rng = np.random.default_rng(seed)
    centroids, labels, sse = lloyd(vecs, k, rng, max_iters=max_iters)
    return PseudoLabelSet(
        n_patches=len(patches), k=k, labels=labels, centroids=centroids, sse=sse
    )


@dataclass(frozen=True)
class ContrastiveBatch:
    """One query against one positive and K negative keys."""

    query: np.ndarray  # (D,)
    positive: np.ndarray  # (D,)
    negatives: np.ndarray  # (K, D)
    temperature: float

    def __post_init__(self):
        query = _frozen_array(self.query, np.float64)
        positive = _frozen_array(self.positive, np.float64)
        negatives = _frozen_array(self.negatives, np.float64)
        if query.ndim != 1 or positive.shape != query.shape:
            raise InvalidInputError("query and positive must be vectors of one dimension")
        if negatives.ndim != 2 or negatives.shape[1] != query.shape[0]:
            raise InvalidInputError("negatives must be (K, D) matching the query")
        for name, arr in (("query", query), ("positive", positive), ("negatives", negatives)):
            if not np.isfinite(arr).all():
                raise InvalidInputError(f"{name} contains non-finite values")
        if not self.temperature > 0:
            raise ConfigError(f"temperature must be > 0, got {self.temperature}")
        object.__setattr__(self, "query", query)
        object.__setattr__(self, "positive", positive)
        object.__setattr__(self, "negatives", negatives)


def info_nce(batch: ContrastiveBatch) -> float:
    """(K+1)-way softmax log loss of the query against its positive key.

    Computed with max-logit subtraction so saturated batches stay finite.
    """
    pos = float(batch.query @ batch.positive) / batch.temperature
    negs = (batch.negatives @ batch.query) / batch.temperature
    logits = np.concatenate(([pos], negs))
    peak = logits.max()
    lse = peak + np.log(np.exp(logits - peak).sum())
    return float(lse - pos)
