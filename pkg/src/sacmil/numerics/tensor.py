"""Dense arrays with a minimal reverse-mode tape.

Every differentiable operation returns a new :class:`Tensor` holding a
closure that maps the output adjoint to input adjoints.  ``backward`` walks
the graph in reverse topological order and accumulates into the ``grad`` of
leaves that require gradients.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

from ..errors import ContractError, DimensionError

class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "name")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        parents: Sequence["Tensor"] = (),
        backward: Callable | None = None,
        name: str | None = None,
    ):
        self.data = np.asarray(data)
        if self.data.ndim > 3:
            raise DimensionError(f"rank {self.data.ndim} arrays are not supported")
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(self.data) if requires_grad and not parents else None
        self._parents = tuple(parents)
        self._backward = backward
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad[...] = 0

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, dtype={self.dtype})"

    # operator sugar
    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _node(data: np.ndarray, parents: Iterable[Tensor], backward: Callable) -> Tensor:
    parents = tuple(parents)
    needs = any(p.requires_grad for p in parents)
    if not needs:
        return Tensor(data)
    return Tensor(data, requires_grad=True, parents=parents, backward=backward)


def backward(root: Tensor, seed: float = 1.0) -> None:
    """Accumulate d(root)/d(leaf) into every reachable leaf's ``grad``."""
    if root.data.size != 1:
        raise ContractError(f"backward needs a scalar root, got shape {root.shape}")
    if not root.requires_grad:
        return

    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))

    adj: dict[int, np.ndarray] = {id(root): np.full_like(root.data, seed)}
    for node in reversed(order):
        g = adj.pop(id(node), None)
        if g is None:
            continue
        if not node._parents:
            node.grad += g
            continue
        grads = node._backward(g)
        for p, gp in zip(node._parents, grads):
            if gp is None or not p.requires_grad:
                continue
            if id(p) in adj:
                adj[id(p)] = adj[id(p)] + gp
            else:
                adj[id(p)] = gp


# ---------------------------------------------------------------------------
# primitive operations
# ---------------------------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul shapes {a.shape} and {b.shape} do not align")
    ad, bd = a.data, b.data

    def bw(g):
        return g @ bd.T, ad.T @ g

    return _node(ad @ bd, (a, b), bw)


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """``x @ weight + bias`` for x of shape (L, D_in) or (D_in,), weight (D_in, D_out)."""
    if x.data.ndim not in (1, 2) or weight.data.ndim != 2 or x.shape[-1] != weight.shape[0]:
        raise DimensionError(f"linear shapes {x.shape} and {weight.shape} do not align")
    xd, wd = x.data, weight.data
    out = xd @ wd
    vec = xd.ndim == 1

    def grad_w(g):
        return np.outer(xd, g) if vec else xd.T @ g

    if bias is None:
        return _node(out, (x, weight), lambda g: (g @ wd.T, grad_w(g)))
    if bias.shape != (wd.shape[1],):
        raise DimensionError(f"bias shape {bias.shape} does not match {wd.shape}")
    out = out + bias.data

    def bw(g):
        return g @ wd.T, grad_w(g), g if vec else g.sum(axis=0)

    return _node(out, (x, weight, bias), bw)


def add(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.shape != b.shape:
        raise DimensionError(f"add shapes {a.shape} and {b.shape} differ")
    return _node(a.data + b.data, (a, b), lambda g: (g, g))


def total(x: Tensor) -> Tensor:
    """Sum of all entries as a scalar tensor."""
    return _node(np.asarray(x.data.sum()), (x,), lambda g: (np.broadcast_to(g, x.shape).copy(),))


def weighted_sum(x: Tensor, weights: np.ndarray) -> Tensor:
    """Scalar ``sum(x * weights)`` for a constant ``weights`` array."""
    w = np.asarray(weights)
    if w.shape != x.shape:
        raise DimensionError(f"weights of shape {w.shape} for tensor {x.shape}")
    return _node(np.asarray((x.data * w).sum()), (x,), lambda g: (g * w,))


def gelu(x: Tensor) -> Tensor:
    """Exact GELU, ``x * Phi(x)``."""
    from .. import kernels

    out, der = kernels.gelu(x.data)
    return _node(out, (x,), lambda g: (der * g,))


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    if x.data.ndim != 2:
        raise DimensionError(f"layer_norm expects (L, D), got {x.shape}")
    d = x.shape[1]
    if d < 2:
        raise ContractError("layer_norm needs at least 2 channels; D < 2 is degenerate")
    if eps <= 0:
        raise ContractError("layer_norm eps must be positive")
    xd = x.data
    mu = xd.mean(axis=1, keepdims=True)
    xc = xd - mu
    var = (xc * xc).mean(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    gd = gamma.data
    out = xhat * gd + beta.data

    def bw(g):
        gx = g * gd
        dx = inv * (gx - gx.mean(axis=1, keepdims=True) - xhat * (gx * xhat).mean(axis=1, keepdims=True))
        return dx, (g * xhat).sum(axis=0), g.sum(axis=0)

    return _node(out, (x, gamma, beta), bw)


def linear_map(x: Tensor, forward: Callable, adjoint: Callable) -> Tensor:
    """Wrap a fixed linear map on arrays; ``adjoint`` is its transpose.

    Used for shifts, rolls and rotary rotations, none of which carry
    parameters.
    """
    return _node(forward(x.data), (x,), lambda g: (adjoint(g),))


def masked_mean(x: Tensor, mask: np.ndarray) -> Tensor:
    """Mean over the rows of ``x`` selected by the boolean ``mask``."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (x.shape[0],):
        raise DimensionError(f"mask of shape {mask.shape} for {x.shape[0]} rows")
    count = int(mask.sum())
    if count == 0:
        raise ContractError("masked_mean over zero rows")
    w = mask.astype(x.dtype) / x.dtype.type(count)
    out = w @ x.data

    def bw(g):
        return np.outer(w, g),

    return _node(out, (x,), bw)


def softmax_cross_entropy(logits: Tensor, label: int) -> Tensor:
    """Negative log softmax probability of ``label`` for a 1-D logit vector."""
    if logits.data.ndim != 1:
        raise DimensionError(f"logits must be 1-D, got {logits.shape}")
    c = logits.shape[0]
    if not 0 <= label < c:
        raise IndexError(f"label {label} out of range for {c} classes")
    z = logits.data - logits.data.max()
    logsum = np.log(np.exp(z).sum())
    loss = logsum - z[label]

    def bw(g):
        p = np.exp(z - logsum)
        p[label] -= 1.0
        return p * g,

    return _node(np.asarray(loss, dtype=logits.dtype), (logits,), bw)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)
