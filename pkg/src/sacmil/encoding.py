"""Rotary and sinusoidal positional encodings, including the polar variant
driven by normalised patch coordinates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError
from .numerics import Tensor, add, linear_map

ENCODER_KINDS = ("none", "sinusoidal", "rope1d", "rope2d", "prope")


def theta_schedule(dim: int, base: float = 10000.0) -> np.ndarray:
    """``base ** (-t / (dim/2))`` for ``t = 0 .. dim/2 - 1``."""
    if dim < 2 or dim % 2:
        raise ContractError(f"rotary dimension must be even and >= 2, got {dim}")
    half = dim // 2
    return base ** (-np.arange(half, dtype=np.float64) / half)


def normalize_coords(coords) -> np.ndarray:
    """Min-max normalise each axis to [0, 1]; a constant axis maps to 0."""
    c = np.asarray(coords, dtype=np.float64)
    if c.ndim != 2 or c.shape[1] != 2 or c.shape[0] == 0:
        raise ContractError(f"coordinates must be a non-empty (n, 2) array, got {c.shape}")
    lo = c.min(axis=0)
    span = c.max(axis=0) - lo
    out = np.zeros_like(c)
    for ax in range(2):
        if span[ax] > 0:
            out[:, ax] = (c[:, ax] - lo[ax]) / span[ax]
    return out


@dataclass(frozen=True)
class PolarCoords:
    rho: np.ndarray
    alpha: np.ndarray

    def __len__(self) -> int:
        return int(self.rho.size)


def to_polar(norm_coords, lam: float) -> PolarCoords:
    if lam <= 0:
        raise ConfigError(f"scaling factor lambda must be positive, got {lam}")
    c = np.asarray(norm_coords, dtype=np.float64)
    x, y = c[:, 0], c[:, 1]
    return PolarCoords(rho=np.hypot(x, y) * lam, alpha=np.arctan2(y, x))


def rotate_pairs(x: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """Rotate channel pair ``(2t, 2t+1)`` of row ``m`` by ``angles[m, t]``."""
    return _rotate(x, np.cos(angles), np.sin(angles))


def _rotate(x: np.ndarray, cos: np.ndarray, sin: np.ndarray) -> np.ndarray:
    cos = cos.astype(x.dtype, copy=False)
    sin = sin.astype(x.dtype, copy=False)
    a = x[:, 0::2]
    b = x[:, 1::2]
    out = np.empty_like(x)
    out[:, 0::2] = a * cos - b * sin
    out[:, 1::2] = a * sin + b * cos
    return out


def _rotary(h: Tensor, angles: np.ndarray) -> Tensor:
    return RotaryTable(np.cos(angles), np.sin(angles)).apply(h)


@dataclass(frozen=True)
class RotaryTable:
    """Precomputed cosines and sines of per-position, per-pair angles."""

    cos: np.ndarray
    sin: np.ndarray

    def apply(self, h: Tensor) -> Tensor:
        cos, sin = self.cos, self.sin
        return linear_map(h, lambda x: _rotate(x, cos, sin), lambda g: _rotate(g, cos, -sin))


@dataclass(frozen=True)
class AdditiveTable:
    table: np.ndarray

    def apply(self, h: Tensor) -> Tensor:
        return add(h, Tensor(self.table.astype(h.dtype, copy=False)))


class IdentityTable:
    def apply(self, h: Tensor) -> Tensor:
        return h


def _check_width(h: Tensor, length: int, multiple: int = 2) -> None:
    if h.data.ndim != 2:
        raise ContractError(f"expected an (L, D) sequence, got {h.shape}")
    if h.shape[1] % multiple:
        raise ContractError(f"channel count {h.shape[1]} must be divisible by {multiple}")
    if h.shape[0] != length:
        raise ContractError(f"sequence length {h.shape[0]} does not match {length} positions")


def apply_prope(h: Tensor, polar: PolarCoords, theta: np.ndarray | None = None) -> Tensor:
    """Rotate pair ``t`` of instance ``m`` by ``rho_m * theta_t + alpha_m``."""
    _check_width(h, len(polar))
    if theta is None:
        theta = theta_schedule(h.shape[1])
    angles = polar.rho[:, None] * theta[None, :] + polar.alpha[:, None]
    return _rotary(h, angles)


def apply_rope_1d(h: Tensor, indices, theta: np.ndarray | None = None) -> Tensor:
    idx = np.asarray(indices, dtype=np.float64)
    _check_width(h, idx.size)
    if theta is None:
        theta = theta_schedule(h.shape[1])
    return _rotary(h, idx[:, None] * theta[None, :])


def apply_rope_2d(h: Tensor, px, py) -> Tensor:
    """Axis-interleaved 2D rotary: even channel pairs follow x, odd pairs y."""
    px = np.asarray(px, dtype=np.float64)
    py = np.asarray(py, dtype=np.float64)
    _check_width(h, px.size, multiple=4)
    theta = theta_schedule(h.shape[1] // 2)
    angles = np.empty((px.size, h.shape[1] // 2))
    angles[:, 0::2] = px[:, None] * theta[None, :]
    angles[:, 1::2] = py[:, None] * theta[None, :]
    return _rotary(h, angles)


def sinusoidal_table(length: int, dim: int) -> np.ndarray:
    theta = theta_schedule(dim)
    ang = np.arange(length, dtype=np.float64)[:, None] * theta[None, :]
    table = np.empty((length, dim))
    table[:, 0::2] = np.sin(ang)
    table[:, 1::2] = np.cos(ang)
    return table


def positional_table(kind: str, coords, dim: int, lam: float = 512.0, dtype=np.float64):
    """Precompute encoder ``kind`` for an arranged sequence with arranged ``coords``.

    The result has an ``apply(h)`` method; computing it once per bag keeps
    trigonometry out of the training loop.
    """
    if kind not in ENCODER_KINDS:
        raise ConfigError(f"unknown encoder {kind!r}; choose from {ENCODER_KINDS}")
    L = len(coords)
    if kind == "none":
        return IdentityTable()
    if kind == "sinusoidal":
        return AdditiveTable(sinusoidal_table(L, dim).astype(dtype))
    if dim % 2:
        raise ContractError(f"rotary encoders need an even channel count, got {dim}")
    theta = theta_schedule(dim)
    if kind == "rope1d":
        angles = np.arange(L, dtype=np.float64)[:, None] * theta[None, :]
    else:
        norm = normalize_coords(coords)
        if kind == "rope2d":
            if dim % 4:
                raise ContractError(f"rope2d needs D divisible by 4, got {dim}")
            half = theta_schedule(dim // 2)
            angles = np.empty((L, dim // 2))
            angles[:, 0::2] = (norm[:, 0] * lam)[:, None] * half[None, :]
            angles[:, 1::2] = (norm[:, 1] * lam)[:, None] * half[None, :]
        else:
            polar = to_polar(norm, lam)
            angles = polar.rho[:, None] * theta[None, :] + polar.alpha[:, None]
    return RotaryTable(np.cos(angles).astype(dtype), np.sin(angles).astype(dtype))


def encode(h: Tensor, kind: str, coords, lam: float = 512.0) -> Tensor:
    """Apply encoder ``kind`` to an arranged sequence with arranged ``coords``."""
    if len(coords) != h.shape[0]:
        raise ContractError(f"{len(coords)} coordinates for a sequence of length {h.shape[0]}")
    return positional_table(kind, coords, h.shape[1], lam, h.dtype).apply(h)
