"""Reference token mixers used only for effective-context comparisons.

``ChordStack`` rolls channel tracks by powers of two; ``CycleStack`` reads
each channel at a fixed small offset.  Both mix channels with a linear map
and GELU afterwards.  ``ChannelMLPStack`` does no token mixing at all.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError, ContractError
from .numerics import ParamStore, Tensor, gelu, linear, linear_map


def _roll_groups(x: np.ndarray, groups: list[tuple[slice, int]]) -> np.ndarray:
    # out[j] = x[j - shift] for each channel group
    out = np.empty_like(x)
    for cols, shift in groups:
        out[:, cols] = np.roll(x[:, cols], shift, axis=0)
    return out


def _invert(groups: list[tuple[slice, int]]) -> list[tuple[slice, int]]:
    return [(cols, -shift) for cols, shift in groups]


def chord_tracks(length: int, dim: int) -> list[tuple[slice, int]]:
    """Channel tracks and their roll distances: one unrolled track, then
    tracks rolled by ``1, 2, 4, ..., 2**(T-1)`` with ``T = ceil(log2 L)``."""
    if length < 2:
        raise ContractError(f"chord mixing needs L >= 2, got {length}")
    T = math.ceil(math.log2(length))
    n_tracks = T + 1
    if dim < n_tracks:
        raise ConfigError(f"D={dim} is too small for {n_tracks} chord tracks at L={length}")
    width = dim // n_tracks
    shifts = [0] + [2**t for t in range(T)]
    groups = []
    for i, s in enumerate(shifts):
        stop = dim if i == n_tracks - 1 else (i + 1) * width
        groups.append((slice(i * width, stop), s))
    return groups


def chord_reach(length: int, layers: int) -> set[int]:
    """Offsets ``j - i`` (mod L) through which input ``i`` can reach output ``j``."""
    T = math.ceil(math.log2(length))
    steps = {0} | {2**t for t in range(T)}
    reach = {0}
    for _ in range(layers):
        reach = {(r + s) % length for r in reach for s in steps}
    return reach


def cycle_offsets(dim: int, stepsize: int) -> np.ndarray:
    """Per-channel read offset ``(c mod S) - S//2``."""
    if stepsize < 1:
        raise ConfigError(f"cycle stepsize must be >= 1, got {stepsize}")
    return (np.arange(dim) % stepsize) - stepsize // 2


def cycle_footprint(layers: int, stepsize: int) -> int:
    return layers * (stepsize - 1) + 1


class _MixerStack:
    kind = "base"

    def __init__(self, dim: int, layers: int, seed: int = 0, dtype=np.float32):
        if layers < 1:
            raise ConfigError(f"need at least one layer, got {layers}")
        self.dim = dim
        self.params = ParamStore(dtype)
        rng = np.random.default_rng(seed)
        self.layers = [
            (self.params.glorot(f"layer{i}.w", dim, dim, rng), self.params.zeros(f"layer{i}.b", dim))
            for i in range(layers)
        ]

    def _mix(self, x: Tensor) -> Tensor:
        return x

    def __call__(self, x: Tensor) -> Tensor:
        for w, b in self.layers:
            x = gelu(linear(self._mix(x), w, b))
        return x


class ChannelMLPStack(_MixerStack):
    kind = "none"


class ChordStack(_MixerStack):
    kind = "chord"

    def _mix(self, x: Tensor) -> Tensor:
        groups = chord_tracks(x.shape[0], x.shape[1])
        back = _invert(groups)
        return linear_map(x, lambda a: _roll_groups(a, groups), lambda g: _roll_groups(g, back))


class CycleStack(_MixerStack):
    kind = "cycle"

    def __init__(self, dim: int, layers: int, stepsize: int = 6, seed: int = 0, dtype=np.float32):
        super().__init__(dim, layers, seed, dtype)
        offsets = cycle_offsets(dim, stepsize)
        self.stepsize = stepsize
        # reading x[j + o] is rolling by -o
        self._groups = [(np.flatnonzero(offsets == o), -int(o)) for o in np.unique(offsets)]

    def _mix(self, x: Tensor) -> Tensor:
        if x.shape[0] < self.stepsize:
            raise ContractError(f"sequence length {x.shape[0]} is shorter than stepsize {self.stepsize}")
        groups = self._groups
        back = _invert(groups)
        return linear_map(x, lambda a: _roll_groups(a, groups), lambda g: _roll_groups(g, back))
