"""Parameter storage, seeded initialisation and the Adam optimizer."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from ..errors import ContractError
from .tensor import Tensor


class ParamStore:
    """Named trainable arrays kept in creation order."""

    def __init__(self, dtype=np.float32):
        self.dtype = np.dtype(dtype)
        self._params: dict[str, Tensor] = {}
        self._flat: np.ndarray | None = None
        self._flat_grad: np.ndarray | None = None

    def add(self, name: str, value: np.ndarray) -> Tensor:
        if name in self._params:
            raise ContractError(f"duplicate parameter name {name!r}")
        if self._flat is not None:
            raise ContractError("cannot add parameters after consolidation")
        t = Tensor(np.array(value, dtype=self.dtype), requires_grad=True, name=name)
        self._params[name] = t
        return t

    def glorot(self, name: str, fan_in: int, fan_out: int, rng: np.random.Generator) -> Tensor:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return self.add(name, rng.uniform(-limit, limit, size=(fan_in, fan_out)))

    def zeros(self, name: str, *shape: int) -> Tensor:
        return self.add(name, np.zeros(shape))

    def ones(self, name: str, *shape: int) -> Tensor:
        return self.add(name, np.ones(shape))

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __iter__(self) -> Iterator[Tensor]:
        return iter(self._params.values())

    def __len__(self) -> int:
        return len(self._params)

    def names(self) -> list[str]:
        return list(self._params)

    def items(self):
        return self._params.items()

    def count(self) -> int:
        return sum(p.data.size for p in self)

    def zero_grad(self) -> None:
        for p in self:
            p.zero_grad()

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.items()}

    def load(self, values: dict[str, np.ndarray]) -> None:
        for name, p in self.items():
            p.data[...] = values[name]

    def consolidate(self) -> tuple[np.ndarray, np.ndarray]:
        """Move every parameter and gradient into one contiguous buffer.

        Parameters become views, so whole-store updates are single array
        operations.  Idempotent.
        """
        if self._flat is None:
            size = self.count()
            flat = np.empty(size, dtype=self.dtype)
            flat_grad = np.empty(size, dtype=self.dtype)
            off = 0
            for p in self:
                n = p.data.size
                flat[off : off + n] = p.data.ravel()
                flat_grad[off : off + n] = p.grad.ravel()
                p.data = flat[off : off + n].reshape(p.data.shape)
                p.grad = flat_grad[off : off + n].reshape(p.data.shape)
                off += n
            self._flat, self._flat_grad = flat, flat_grad
        return self._flat, self._flat_grad

    def flat(self) -> np.ndarray:
        return np.concatenate([p.data.ravel() for p in self])

    def flat_grad(self) -> np.ndarray:
        return np.concatenate([p.grad.ravel() for p in self])


@dataclass
class AdamState:
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: np.ndarray | None = None
    v: np.ndarray | None = None

    @classmethod
    def for_params(cls, params: ParamStore, lr: float = 1e-4, **kw) -> "AdamState":
        flat, _ = params.consolidate()
        return cls(lr=lr, m=np.zeros_like(flat), v=np.zeros_like(flat), **kw)


def adam_step(params: ParamStore, state: AdamState) -> None:
    """Bias-corrected Adam update in place, then zero the gradients."""
    flat, g = params.consolidate()
    m, v = state.m, state.v
    if m is None or m.shape != flat.shape or v.shape != flat.shape:
        raise ContractError(
            f"Adam moments of shape {None if m is None else m.shape} drifted from {flat.size} parameters"
        )
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    m *= b1
    m += (1.0 - b1) * g
    v *= b2
    v += (1.0 - b2) * (g * g)
    m_hat = m / (1.0 - b1**t)
    v_hat = v / (1.0 - b2**t)
    flat -= (state.lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(flat.dtype, copy=False)
    g[...] = 0
