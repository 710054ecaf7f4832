"""Backend selection for the hot kernels.

The compiled extension is used when it imports and ``SACMIL_NO_EXT`` is not
set in the environment; otherwise the numpy fallback is used.  :func:`use_backend` switches at runtime, which is how the
tests and the benchmark compare the two.
"""

from __future__ import annotations

import os
from contextlib import contextmanager

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = _kernels_py if os.environ.get("SACMIL_NO_EXT") else _BACKENDS.get("compiled", _kernels_py)


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def active_backend() -> str:
    return "compiled" if _active is _compiled and _compiled is not None else "python"


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    _active = _BACKENDS[name]


@contextmanager
def use_backend(name: str):
    prev = active_backend()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)


def shift_folds(x: np.ndarray, k: int, scale: int, block: int, inverse: bool) -> np.ndarray:
    x = np.ascontiguousarray(x)
    if x.dtype not in (np.float32, np.float64):
        x = x.astype(np.float64)
    return _active.shift_folds(x, int(k), int(scale), int(block), bool(inverse))


def fps(coords: np.ndarray, count: int, seed: int) -> np.ndarray:
    return _active.fps(np.ascontiguousarray(coords, dtype=np.int64), int(count), int(seed))


def assign_greedy(coords: np.ndarray, centers: np.ndarray, k: int):
    return _active.assign_greedy(
        np.ascontiguousarray(coords, dtype=np.int64),
        np.ascontiguousarray(centers, dtype=np.int64),
        int(k),
    )


def gelu(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """GELU values and derivatives, same shape and dtype as ``x``."""
    x = np.ascontiguousarray(x)
    if x.dtype not in (np.float32, np.float64):
        x = x.astype(np.float64)
    out, der = _active.gelu(x.reshape(-1))
    return out.reshape(x.shape), der.reshape(x.shape)
