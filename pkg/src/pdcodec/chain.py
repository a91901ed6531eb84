"""Forward degradation over a palette chain and the reverse recursion.

The forward operator replaces every cell with its severity-t centroid; one
severity step equals one recorded merge, so composing single steps and
degrading directly agree bit-exactly (the chain is Markov by construction).
The reverse recursion z_{t-1} = z_t - C(z0_hat, t) + C(z0_hat, t-1) walks
back down the chain given any restoration operator predicting z0_hat.

All value-space arithmetic happens on the quantized grid: tensors here hold
float64 values drawn from palette centroids of uint8 data.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np

from .clustering import IndexMap, PaletteChain, _assign
from .errors import ConsistencyError, InvalidInputError, RangeError
from .tensor import FeatureTensor

MODE_HIERARCHY = "hierarchy-consistent"
MODE_NEAREST = "nearest-centroid"

_MODE_ALIASES = {
    "hc": MODE_HIERARCHY,
    "nc": MODE_NEAREST,
    MODE_HIERARCHY: MODE_HIERARCHY,
    MODE_NEAREST: MODE_NEAREST,
}


def _canon_mode(mode: str) -> str:
    try:
        return _MODE_ALIASES[mode]
    except KeyError:
        raise InvalidInputError(f"unknown projection mode {mode!r}") from None


@dataclass(frozen=True)
class DegradedState:
    """A point on the chain: severity t plus the index map at t."""

    chain: PaletteChain
    severity: int
    index_map: IndexMap

    def __post_init__(self):
        self.chain.check_severity(self.severity)
        k_t = self.chain.k0 - self.severity
        if self.index_map.indices.max() >= k_t:
            raise InvalidInputError(
                f"index map refers past the severity-{self.severity} palette"
            )
        if (self.index_map.height, self.index_map.width) != self.chain.source_shape[:2]:
            raise InvalidInputError("index map dimensions do not match the chain")


def degrade(chain: PaletteChain, t: int) -> DegradedState:
    """Forward process: the chain state after t merges."""
    chain.check_severity(t)
    return DegradedState(chain=chain, severity=t, index_map=chain.index_map_at(t))


def degrade_step(chain: PaletteChain, state: DegradedState) -> DegradedState:
    """Apply one more merge to a state; equals ``degrade(chain, t + 1)`` exactly."""
    t = state.severity + 1
    if t > chain.max_severity:
        raise RangeError(f"state already at maximum severity {chain.max_severity}")
    relabel = chain.step_relabel(t)
    return DegradedState(
        chain=chain, severity=t, index_map=IndexMap(relabel[state.index_map.indices])
    )


def render_values(state: DegradedState) -> FeatureTensor:
    """Per-cell centroid lookup: the state's value-space rendering."""
    palette = state.chain.palette_at(state.severity)
    return FeatureTensor(palette.entries[state.index_map.indices])


def _match_chain_severity(chain: PaletteChain, values: np.ndarray) -> int | None:
    for s in range(chain.k0):
        if np.array_equal(values, chain.rendering_at(s)):
            return s
    return None


def project(chain: PaletteChain, z: FeatureTensor, t: int, mode: str = MODE_NEAREST) -> FeatureTensor:
    """The degradation operator C(z, t) applied to an arbitrary tensor.

    nearest-centroid mode assigns every cell to its closest severity-t
    palette entry (ties to the lower entry id) and substitutes the centroid.
    hierarchy-consistent mode demands that ``z`` be the rendering of some
    chain state and replays the stored assignments, which keeps the
    telescoping identity exact; any other tensor raises
    :class:`ConsistencyError`.
    """
    mode = _canon_mode(mode)
    chain.check_severity(t)
    if z.shape != chain.source_shape:
        raise InvalidInputError(
            f"tensor shape {z.shape} does not match chain source {chain.source_shape}"
        )
    if mode == MODE_HIERARCHY:
        if _match_chain_severity(chain, z.data) is None:
            raise ConsistencyError(
                "tensor is not a rendering of any chain state; "
                "use nearest-centroid mode for free-form inputs"
            )
        return FeatureTensor(chain.rendering_at(t))
    palette = chain.palette_at(t)
    labels = _assign(z.cells(), palette.entries)
    return FeatureTensor(palette.entries[labels].reshape(z.shape))


class Restorer(abc.ABC):
    """Restoration operator: predicts the undegraded tensor from a degraded one."""

    name: str = "restorer"

    @abc.abstractmethod
    def restore(self, values: FeatureTensor, severity: int) -> FeatureTensor:
        """Return a z0 estimate with the same dimensions as ``values``."""


class IdentityRestorer(Restorer):
    """Predicts z0 as the degraded tensor itself."""

    name = "identity"

    def restore(self, values: FeatureTensor, severity: int) -> FeatureTensor:
        return values


class NearestCentroidRestorer(Restorer):
    """Predicts z0 by snapping every cell onto the chain's base palette."""

    name = "nearest-centroid"

    def __init__(self, chain: PaletteChain):
        self._chain = chain

    def restore(self, values: FeatureTensor, severity: int) -> FeatureTensor:
        return project(self._chain, values, 0, MODE_NEAREST)


class OracleRestorer(Restorer):
    """Returns a fixed target tensor regardless of input (a perfect R)."""

    name = "oracle"

    def __init__(self, target: FeatureTensor):
        self._target = target

    def restore(self, values: FeatureTensor, severity: int) -> FeatureTensor:
        if values.shape != self._target.shape:
            raise InvalidInputError("oracle target dimensions do not match the input")
        return self._target


class FileRestorer(Restorer):
    """Loads the per-step z0 prediction from FTEN files.

    ``pattern`` must contain a ``{t}`` placeholder, e.g. ``pred_{t}.ften``;
    the file for the current severity is read on every call.
    """

    name = "file"

    def __init__(self, pattern: str):
        if "{t}" not in pattern:
            raise InvalidInputError("file restorer pattern needs a {t} placeholder")
        self._pattern = pattern

    def restore(self, values: FeatureTensor, severity: int) -> FeatureTensor:
        from .fileio import read_ften

        return read_ften(self._pattern.format(t=severity))


def reverse_step(
    chain: PaletteChain,
    z_t: FeatureTensor,
    t: int,
    restorer: Restorer,
    mode: str = MODE_NEAREST,
) -> FeatureTensor:
    """One reverse transition: z_t - C(z0_hat, t) + C(z0_hat, t-1)."""
    if t < 1:
        raise RangeError("reverse steps start at severity 1")
    chain.check_severity(t)
    z0_hat = restorer.restore(z_t, t)
    back = project(chain, z0_hat, t, mode)
    forward = project(chain, z0_hat, t - 1, mode)
    return FeatureTensor(z_t.data - back.data + forward.data)


def reverse_run(
    chain: PaletteChain,
    state: DegradedState,
    restorer: Restorer,
    mode: str = MODE_NEAREST,
) -> FeatureTensor:
    """Iterate reverse steps from the state's severity down to zero."""
    z = render_values(state)
    for t in range(state.severity, 0, -1):
        z = reverse_step(chain, z, t, restorer, mode)
    return z
