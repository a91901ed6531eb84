"""Content-adaptive palette construction and the hierarchical merge chain.

A palette is built by k-means over the W*H cell vectors of a quantized
tensor (jointly over the C components).  Merging palette entries pairwise in
Ward order then yields a chain of coarser and coarser palettes; the chain is
the codec's degradation schedule, with severity t meaning "t merges applied"
and palette size K0 - t.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import (
    InfeasibleError,
    InsufficientDataError,
    InvalidInputError,
    RangeError,
)
from .tensor import QuantizedTensor, _frozen_array

# Lloyd restarts beyond this many initializations are refused in exhaustive mode.
_EXHAUSTIVE_LIMIT = 200_000


@dataclass(frozen=True)
class Palette:
    """K centroid vectors plus the member count behind each entry."""

    entries: np.ndarray  # (K, C) float64
    sizes: np.ndarray  # (K,) int64

    def __post_init__(self):
        entries = _frozen_array(self.entries, np.float64)
        sizes = _frozen_array(self.sizes, np.int64)
        if entries.ndim != 2 or entries.shape[0] < 1 or entries.shape[1] < 1:
            raise InvalidInputError(f"palette entries must be (K, C), got {entries.shape}")
        if sizes.shape != (entries.shape[0],):
            raise InvalidInputError("sizes must hold one count per palette entry")
        if (sizes < 0).any():
            raise InvalidInputError("entry sizes cannot be negative")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "sizes", sizes)

    @property
    def k(self) -> int:
        return self.entries.shape[0]

    @property
    def channels(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class IndexMap:
    """Per-cell palette indices for a (height, width) grid."""

    indices: np.ndarray  # (H, W) int32

    def __post_init__(self):
        idx = _frozen_array(self.indices, np.int32)
        if idx.ndim != 2 or min(idx.shape) < 1:
            raise InvalidInputError(f"index map must be 2-D, got shape {idx.shape}")
        if idx.size and idx.min() < 0:
            raise InvalidInputError("indices cannot be negative")
        object.__setattr__(self, "indices", idx)

    @property
    def height(self) -> int:
        return self.indices.shape[0]

    @property
    def width(self) -> int:
        return self.indices.shape[1]


class MergeStep(NamedTuple):
    """One bottom-up merge: entries ``left`` < ``right`` of the current palette.

    The merged entry keeps index ``left``; entries past ``right`` shift down
    by one.  ``centroid`` is the size-weighted mean of the two parents and
    ``sse_increase`` the Ward cost paid by the merge.
    """

    left: int
    right: int
    centroid: np.ndarray
    size: int
    sse_increase: float


def _assign(points: np.ndarray, centroids: np.ndarray, chunk: int = 1 << 14) -> np.ndarray:
    """Nearest-centroid labels by squared Euclidean distance; ties -> lowest id.

    Scores ||c||^2 - 2 x.c share the argmin with the true distances (the
    ||x||^2 term is constant per point) and are exact for integer-grid data,
    so documented tie behavior is preserved.
    """
    n = points.shape[0]
    c2 = (centroids * centroids).sum(axis=1)
    labels = np.empty(n, dtype=np.int32)
    for start in range(0, n, chunk):
        block = points[start : start + chunk]
        scores = c2 - 2.0 * (block @ centroids.T)
        labels[start : start + chunk] = np.argmin(scores, axis=1)
    return labels


def _sse(points: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> float:
    return float(((points - centroids[labels]) ** 2).sum())


def _min_sq_dists(points: np.ndarray, centroids: np.ndarray, chunk: int = 1 << 14) -> np.ndarray:
    n = points.shape[0]
    c2 = (centroids * centroids).sum(axis=1)
    out = np.empty(n)
    for start in range(0, n, chunk):
        block = points[start : start + chunk]
        scores = c2 - 2.0 * (block @ centroids.T)
        out[start : start + chunk] = scores.min(axis=1) + (block * block).sum(axis=1)
    np.clip(out, 0.0, None, out=out)  # cancellation can dip a hair below zero
    return out


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]), dtype=np.float64)
    centroids[0] = points[int(rng.integers(n))]
    if k == 1:
        return centroids
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        # total > 0 while fewer centroids than distinct points (precondition).
        probs = d2 / total
        centroids[i] = points[int(rng.choice(n, p=probs))]
        d2 = np.minimum(d2, ((points - centroids[i]) ** 2).sum(axis=1))
    return centroids


def _random_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    # Sample distinct cell vectors so no two initial centroids coincide.
    uniq = np.unique(points, axis=0)
    picks = rng.choice(len(uniq), size=k, replace=False)
    return uniq[np.sort(picks)].astype(np.float64)


def _update_centroids(
    points: np.ndarray, labels: np.ndarray, k: int, previous: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    sums = np.zeros((k, points.shape[1]), dtype=np.float64)
    np.add.at(sums, labels, points)
    centroids = previous.copy()
    nonzero = counts > 0
    centroids[nonzero] = sums[nonzero] / counts[nonzero, None]
    return centroids, counts


def _reseed_empty(points: np.ndarray, centroids: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Move each empty centroid to the point farthest from its nearest centroid."""
    centroids = centroids.copy()
    for cid in np.flatnonzero(counts == 0):
        gaps = _min_sq_dists(points, centroids)
        centroids[cid] = points[int(np.argmax(gaps))]
    return centroids


def lloyd(
    points: np.ndarray,
    k: int,
    rng: np.random.Generator,
    *,
    init: str = "kmeans++",
    max_iters: int = 100,
    single_pass: bool = False,
    on_iteration: Callable[[int, float], None] | None = None,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Lloyd's algorithm over (N, D) points; returns (centroids, labels, sse).

    ``on_iteration`` receives (iteration, sse-after-iteration) and exists so
    the per-iteration monotonicity of the objective can be observed.  With
    ``single_pass`` only one assignment and one centroid update run; empty
    clusters then keep their initial centroid.
    """
    points = np.asarray(points, dtype=np.float64)
    if init == "kmeans++":
        centroids = _kmeanspp_init(points, k, rng)
    elif init == "random":
        centroids = _random_init(points, k, rng)
    else:
        raise InvalidInputError(f"unknown init {init!r}")

    labels = _assign(points, centroids)
    if single_pass:
        centroids, _counts = _update_centroids(points, labels, k, centroids)
        return centroids, labels, _sse(points, centroids, labels)

    for iteration in range(max_iters):
        centroids, counts = _update_centroids(points, labels, k, centroids)
        if (counts == 0).any():
            centroids = _reseed_empty(points, centroids, counts)
        new_labels = _assign(points, centroids)
        if on_iteration is not None:
            on_iteration(iteration, _sse(points, centroids, new_labels))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    # Pin centroids to the exact means of the final assignment.  A converged
    # run recomputes identical values; a run stopped at max_iters gets the
    # "centroid = member mean" invariant the merge-chain algebra relies on.
    centroids, _counts = _update_centroids(points, labels, k, centroids)
    return centroids, labels, _sse(points, centroids, labels)


def _exact_partition_sse(sorted_vals: Sequence, bounds: tuple[int, ...]) -> Fraction:
    """Exact SSE of a contiguous partition; bounds are segment start offsets."""
    total = Fraction(0)
    edges = (0, *bounds, len(sorted_vals))
    for a, b in zip(edges, edges[1:]):
        seg = sorted_vals[a:b]
        n = b - a
        s1 = sum(seg)
        s2 = sum(v * v for v in seg)
        total += Fraction(n * s2 - s1 * s1, n)
    return total


def _exhaustive_1d(points: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Globally optimal 1-D k-means via contiguous-partition enumeration.

    Optimal 1-D clusters are contiguous in sorted order, so scanning every
    choice of k-1 breakpoints with exact (rational) SSE comparison finds the
    true optimum; ties resolve to the lexicographically smallest breakpoints.
    """
    n = points.shape[0]
    if math.comb(n - 1, k - 1) > _EXHAUSTIVE_LIMIT:
        raise InfeasibleError(
            f"exhaustive search over {math.comb(n - 1, k - 1)} partitions refused; "
            "use integer restarts instead"
        )
    order = np.argsort(points[:, 0], kind="stable")
    svals = [Fraction(float(v)) for v in points[order, 0]]
    best_bounds: tuple[int, ...] | None = None
    best_sse: Fraction | None = None
    for bounds in itertools.combinations(range(1, n), k - 1):
        sse = _exact_partition_sse(svals, bounds)
        if best_sse is None or sse < best_sse:
            best_sse, best_bounds = sse, bounds
    labels_sorted = np.zeros(n, dtype=np.int32)
    edges = (0, *best_bounds, n)
    centroids = np.empty((k, 1), dtype=np.float64)
    for cid, (a, b) in enumerate(zip(edges, edges[1:])):
        labels_sorted[a:b] = cid
        centroids[cid, 0] = points[order[a:b], 0].mean()
    labels = np.empty(n, dtype=np.int32)
    labels[order] = labels_sorted
    return centroids, labels


def _exhaustive_nd(points: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Best Lloyd run over every k-subset of distinct points (heuristic for C > 1)."""
    uniq = np.unique(points, axis=0).astype(np.float64)
    if math.comb(len(uniq), k) > _EXHAUSTIVE_LIMIT:
        raise InfeasibleError(
            f"exhaustive search over {math.comb(len(uniq), k)} initializations refused"
        )
    best: tuple[float, np.ndarray, np.ndarray] | None = None
    for combo in itertools.combinations(range(len(uniq)), k):
        centroids = uniq[list(combo)]
        labels = _assign(points, centroids)
        for _ in range(100):
            centroids, counts = _update_centroids(points, labels, k, centroids)
            if (counts == 0).any():
                centroids = _reseed_empty(points, centroids, counts)
            new_labels = _assign(points, centroids)
            if np.array_equal(new_labels, labels):
                break
            labels = new_labels
        sse = _sse(points, centroids, labels)
        if best is None or sse < best[0]:
            best = (sse, centroids, labels)
    sse, centroids, labels = best
    return centroids, labels, sse


def kmeans_palette(
    q: QuantizedTensor,
    k: int,
    seed: int = 0,
    max_iters: int = 100,
    *,
    init: str = "kmeans++",
    single_pass: bool = False,
    restarts: int | str = 1,
) -> tuple[Palette, IndexMap]:
    """Build a K-entry content-adaptive palette over the tensor's cells.

    Cells are the W*H vectors of C quantized components, clustered jointly by
    squared Euclidean distance.  Initialization is k-means++ driven by
    ``seed`` (``init="random"`` samples distinct cells uniformly instead),
    and Lloyd iterations run until assignments stabilize or ``max_iters``.
    ``single_pass=True`` stops after one assignment/update round.

    ``restarts`` may be an int (independent seeded runs, best SSE kept) or
    the string ``"exhaustive"``, which for single-channel data returns the
    certified global optimum.
    """
    if k < 1:
        raise InvalidInputError(f"k must be >= 1, got {k}")
    points = q.cells().astype(np.float64)
    n_distinct = len(np.unique(points, axis=0))
    if k > n_distinct:
        raise InfeasibleError(
            f"k={k} exceeds the {n_distinct} distinct cell vectors in the tensor"
        )

    if restarts == "exhaustive":
        if points.shape[1] == 1:
            centroids, labels = _exhaustive_1d(points, k)
        else:
            centroids, labels, _ = _exhaustive_nd(points, k)
    else:
        if not isinstance(restarts, int) or restarts < 1:
            raise InvalidInputError("restarts must be a positive int or 'exhaustive'")
        best: tuple[float, np.ndarray, np.ndarray] | None = None
        for r in range(restarts):
            rng = np.random.default_rng(seed + r)
            c, l, sse = lloyd(
                points, k, rng, init=init, max_iters=max_iters, single_pass=single_pass
            )
            if best is None or sse < best[0]:
                best = (sse, c, l)
        _, centroids, labels = best

    sizes = np.bincount(labels, minlength=k).astype(np.int64)
    palette = Palette(entries=centroids, sizes=sizes)
    index_map = IndexMap(labels.reshape(q.height, q.width))
    return palette, index_map


def assignment_sse(q: QuantizedTensor, palette: Palette, index_map: IndexMap) -> float:
    """Total squared error of the tensor against its palettized rendering."""
    points = q.cells().astype(np.float64)
    labels = index_map.indices.reshape(-1)
    return float(((points - palette.entries[labels]) ** 2).sum())


class PaletteChain:
    """The full merge chain: base palette plus K0 - 1 recorded merges.

    Severity t has exactly K0 - t palette entries; its index map is the base
    map pushed through the first t merge relabelings.  Instances are
    immutable after construction and safe to share across threads.
    """

    def __init__(
        self,
        base_palette: Palette,
        base_index_map: IndexMap,
        steps: tuple[MergeStep, ...],
        palettes: tuple[Palette, ...],
        step_relabels: tuple[np.ndarray, ...],
        severity_maps: tuple[np.ndarray, ...],
    ):
        self.base_palette = base_palette
        self.base_index_map = base_index_map
        self.steps = steps
        self._palettes = palettes
        self._step_relabels = step_relabels
        self._severity_maps = severity_maps
        self._render_cache: dict[int, np.ndarray] = {}

    @property
    def k0(self) -> int:
        return self.base_palette.k

    @property
    def max_severity(self) -> int:
        return self.k0 - 1

    @property
    def channels(self) -> int:
        return self.base_palette.channels

    @property
    def source_shape(self) -> tuple[int, int, int]:
        return (self.base_index_map.height, self.base_index_map.width, self.channels)

    def check_severity(self, t: int) -> None:
        if not 0 <= t <= self.max_severity:
            raise RangeError(f"severity {t} outside [0, {self.max_severity}]")

    def palette_at(self, t: int) -> Palette:
        self.check_severity(t)
        return self._palettes[t]

    def severity_map(self, t: int) -> np.ndarray:
        """Composed relabeling: base entry id -> severity-t entry id."""
        self.check_severity(t)
        return self._severity_maps[t]

    def step_relabel(self, t: int) -> np.ndarray:
        """Relabeling applied by the t-th merge (severity t-1 ids -> severity t)."""
        if not 1 <= t <= self.max_severity:
            raise RangeError(f"no merge step {t} in a chain of {self.k0} entries")
        return self._step_relabels[t - 1]

    def index_map_at(self, t: int) -> IndexMap:
        self.check_severity(t)
        return IndexMap(self._severity_maps[t][self.base_index_map.indices])

    def rendering_at(self, t: int) -> np.ndarray:
        """(H, W, C) centroid values at severity t.  Cached per severity."""
        self.check_severity(t)
        cached = self._render_cache.get(t)
        if cached is None:
            idx = self._severity_maps[t][self.base_index_map.indices]
            cached = self._palettes[t].entries[idx]
            cached.setflags(write=False)
            self._render_cache[t] = cached
        return cached

    def cumulative_merge_cost(self) -> np.ndarray:
        """(K0,) array: total Ward SSE added up to each severity."""
        return np.concatenate(
            ([0.0], np.cumsum([s.sse_increase for s in self.steps]))
        )


def _ward_pair(centroids: np.ndarray, sizes: np.ndarray) -> tuple[int, int, float]:
    """The merge pair minimizing Ward SSE increase; ties -> smallest (i, j)."""
    k = len(sizes)
    diff = centroids[:, None, :] - centroids[None, :, :]
    d2 = (diff**2).sum(axis=2)
    na = sizes[:, None].astype(np.float64)
    nb = sizes[None, :].astype(np.float64)
    totals = na + nb
    weights = np.divide(na * nb, totals, out=np.zeros_like(totals), where=totals > 0)
    delta = weights * d2
    delta[np.tril_indices(k)] = np.inf
    flat = int(np.argmin(delta))  # first minimum in row-major order = smallest (i, j)
    i, j = divmod(flat, k)
    return i, j, float(delta[i, j])


def build_merge_chain(palette: Palette, index_map: IndexMap) -> PaletteChain:
    """Agglomerate the palette bottom-up into a full degradation chain.

    Each of the K0 - 1 steps merges the pair of current entries with the
    smallest Ward SSE increase (n_a*n_b / (n_a+n_b) * ||c_a - c_b||^2); the
    merged centroid is the exact size-weighted mean.  A pair of zero-sized
    entries (possible after single-pass k-means) merges at zero cost onto
    the plain average of the two centroids.
    """
    if index_map.indices.max() >= palette.k:
        raise InvalidInputError("index map refers past the palette")
    if int(palette.sizes.sum()) != index_map.height * index_map.width:
        raise InvalidInputError("palette sizes do not sum to the cell count")

    centroids = palette.entries.copy()
    sizes = palette.sizes.copy()
    steps: list[MergeStep] = []
    relabels: list[np.ndarray] = []
    palettes: list[Palette] = [palette]

    while len(sizes) > 1:
        i, j, cost = _ward_pair(centroids, sizes)
        total = int(sizes[i] + sizes[j])
        if total > 0:
            merged = (sizes[i] * centroids[i] + sizes[j] * centroids[j]) / total
        else:
            merged = (centroids[i] + centroids[j]) / 2.0
        steps.append(
            MergeStep(left=i, right=j, centroid=merged.copy(), size=total, sse_increase=cost)
        )

        k = len(sizes)
        relabel = np.empty(k, dtype=np.int32)
        relabel[:j] = np.arange(j)
        relabel[j] = i
        relabel[j + 1 :] = np.arange(j, k - 1)
        relabels.append(relabel)

        centroids = np.delete(centroids, j, axis=0)
        centroids[i] = merged
        sizes = np.delete(sizes, j)
        sizes[i] = total
        palettes.append(Palette(entries=centroids.copy(), sizes=sizes.copy()))

    severity_maps = [np.arange(palette.k, dtype=np.int32)]
    for relabel in relabels:
        severity_maps.append(relabel[severity_maps[-1]])

    return PaletteChain(
        base_palette=palette,
        base_index_map=index_map,
        steps=tuple(steps),
        palettes=tuple(palettes),
        step_relabels=tuple(relabels),
        severity_maps=tuple(severity_maps),
    )


class ElbowResult(NamedTuple):
    k: int
    knee_found: bool


def elbow_select_k(distortions: Sequence[tuple[int, float]]) -> ElbowResult:
    """Pick K at the knee of a (K, SSE) curve.

    Both axes are min-max normalized, then the point with the largest
    perpendicular distance to the chord joining the first and last points
    wins; ties go to the smallest K.  A flat or exactly linear curve has no
    knee: the smallest K is returned with ``knee_found=False``.
    """
    if len(distortions) < 3:
        raise InsufficientDataError("elbow selection needs at least 3 (K, SSE) points")
    ks = np.array([float(k) for k, _ in distortions])
    sses = np.array([float(s) for _, s in distortions])
    if (np.diff(ks) <= 0).any():
        raise InvalidInputError("K values must be strictly ascending")
    if (np.diff(sses) > 0).any():
        raise InvalidInputError("SSE must be non-increasing in K")

    span_k = ks[-1] - ks[0]
    span_s = sses[0] - sses[-1]
    if span_s == 0:
        return ElbowResult(int(ks[0]), False)
    x = (ks - ks[0]) / span_k
    y = (sses - sses[-1]) / span_s
    # Distance to the chord through (x0, y0) and (x1, y1), up to the constant
    # chord length; the argmax is unaffected.
    cross = (x[-1] - x[0]) * (y - y[0]) - (y[-1] - y[0]) * (x - x[0])
    dist = np.abs(cross) / math.hypot(x[-1] - x[0], y[-1] - y[0])
    best = int(np.argmax(dist))  # first occurrence = smallest K on ties
    if dist[best] <= 1e-12:
        return ElbowResult(int(ks[0]), False)
    return ElbowResult(int(ks[best]), True)
