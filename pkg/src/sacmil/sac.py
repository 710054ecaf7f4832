"""Fold-shift mixing block with exponentially growing regions.

Channels are split into ``k`` folds.  In layer ``l`` fold ``f`` moves
``f * k**l`` positions forward inside aligned blocks of ``k**(l+1)``
positions, a channel MLP mixes the folds that now share a position, the
folds are shifted back and a second channel MLP mixes again.  After the
block every position of a ``k**(l+1)`` region depends on every other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, ContractError
from .numerics import ParamStore, Tensor, add, gelu, layer_norm, linear, linear_map

_MAX_REGION = 2**62


@dataclass(frozen=True)
class ShiftSpec:
    layer: int
    k: int

    def __post_init__(self):
        if self.k < 1 or self.layer < 0:
            raise ConfigError(f"invalid shift spec (layer={self.layer}, k={self.k})")
        if self.k > 1 and (self.layer + 1) * np.log2(self.k) >= 62:
            raise ConfigError(f"region size {self.k}^{self.layer + 1} overflows")

    @property
    def scale(self) -> int:
        return self.k**self.layer

    @property
    def region_size(self) -> int:
        return self.k ** (self.layer + 1)

    def block(self, length: int) -> int:
        """Extent of the aligned block the shift wraps in, for a sequence of ``length``."""
        return min(self.region_size, length)


def region_schedule(k: int, blocks: int, padded_length: int | None = None) -> list[ShiftSpec]:
    if k < 2:
        raise ConfigError(f"fold count k must be >= 2, got {k}")
    if blocks < 1:
        raise ConfigError(f"need at least one block, got {blocks}")
    specs = [ShiftSpec(layer=l, k=k) for l in range(blocks)]
    if padded_length is not None:
        for s in specs:
            _check_length(padded_length, s)
    return specs


def padded_length(n: int, k: int, blocks: int) -> int:
    """Smallest length >= n that every layer's region tiling accepts.

    The length is rounded up to a multiple of ``k``, then to a multiple of
    each larger region size that is still shorter than the sequence.
    """
    if n < 1:
        raise ContractError("cannot pad an empty sequence")
    L = -(-n // k) * k
    for spec in region_schedule(k, blocks):
        r = spec.region_size
        if r < L and L % r:
            L = -(-L // r) * r
    return L


def _check_length(length: int, spec: ShiftSpec) -> None:
    r = spec.region_size
    if r < length and length % r:
        raise ContractError(
            f"sequence length {length} is not a multiple of region size {r}; pad the sequence"
        )


def _check_fold(dim: int, k: int) -> None:
    if dim % k:
        raise ConfigError(f"channel count D={dim} must be divisible by fold count k={k}")


def shift_array(x: np.ndarray, spec: ShiftSpec, inverse: bool = False) -> np.ndarray:
    """Move fold ``f`` of every position by ``+-f * scale`` within its block."""
    x = np.asarray(x)
    if x.ndim != 2:
        raise ContractError(f"expected an (L, D) array, got {x.shape}")
    L, D = x.shape
    _check_fold(D, spec.k)
    _check_length(L, spec)
    if L == 0:
        return x.copy()
    return kernels.shift_folds(x, spec.k, spec.scale, spec.block(L), inverse)


def shift_folds(x: Tensor, spec: ShiftSpec, inverse: bool = False) -> Tensor:
    """Differentiable fold shift; the adjoint of a permutation is its inverse."""
    return linear_map(
        x,
        lambda a: shift_array(a, spec, inverse),
        lambda g: shift_array(g, spec, not inverse),
    )


@dataclass
class SacBlockParams:
    gamma: Tensor
    beta: Tensor
    w1: Tensor
    b1: Tensor
    w2: Tensor
    b2: Tensor
    residual: bool = True

    @classmethod
    def create(
        cls, store: ParamStore, prefix: str, dim: int, rng: np.random.Generator, residual: bool = True
    ) -> "SacBlockParams":
        return cls(
            gamma=store.ones(f"{prefix}.ln.gamma", dim),
            beta=store.zeros(f"{prefix}.ln.beta", dim),
            w1=store.glorot(f"{prefix}.w1", dim, dim, rng),
            b1=store.zeros(f"{prefix}.b1", dim),
            w2=store.glorot(f"{prefix}.w2", dim, dim, rng),
            b2=store.zeros(f"{prefix}.b2", dim),
            residual=residual,
        )


def sac_block_forward(x: Tensor, params: SacBlockParams, spec: ShiftSpec) -> Tensor:
    """``x + W2(unshift(gelu(W1(shift(LN(x))))))``; the residual is optional."""
    _check_fold(x.shape[1], spec.k)
    _check_length(x.shape[0], spec)
    h = layer_norm(x, params.gamma, params.beta)
    h = shift_folds(h, spec)
    h = gelu(linear(h, params.w1, params.b1))
    h = shift_folds(h, spec, inverse=True)
    h = linear(h, params.w2, params.b2)
    return add(x, h) if params.residual else h


class SacStack:
    """``blocks`` SAC blocks with layer indices ``0 .. blocks-1``."""

    kind = "sac"

    def __init__(self, dim: int, k: int, blocks: int, seed: int = 0, residual: bool = True, dtype=np.float32):
        _check_fold(dim, k)
        self.dim, self.k = dim, k
        self.specs = region_schedule(k, blocks)
        self.params = ParamStore(dtype)
        rng = np.random.default_rng(seed)
        self.blocks = [
            SacBlockParams.create(self.params, f"block{l}", dim, rng, residual) for l in range(blocks)
        ]

    def __call__(self, x: Tensor) -> Tensor:
        for p, spec in zip(self.blocks, self.specs):
            x = sac_block_forward(x, p, spec)
        return x
