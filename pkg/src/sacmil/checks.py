"""Finite-difference verification of every differentiable operation.

Each check contracts the operation's output with a fixed random weight
array into a scalar, backpropagates, and compares the gradient of every
input with central differences in double precision.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .baselines import ChordStack, CycleStack
from .bagio import InstanceBag
from .encoding import PolarCoords, apply_prope, apply_rope_1d, apply_rope_2d, encode
from .numerics import (
    GradCheckReport,
    Tensor,
    backward,
    finite_diff_check,
    gelu,
    layer_norm,
    linear,
    masked_mean,
    matmul,
    softmax_cross_entropy,
    total,
    weighted_sum,
)
from .model import ModelConfig, bag_loss, build_model
from .sac import SacStack, ShiftSpec, shift_folds

FD_EPS = 1e-3
FD_TOL = 1e-4


def _contract(out: Tensor, weights: np.ndarray | None) -> Tensor:
    return out if weights is None else weighted_sum(out, weights)


def check_op(
    name: str,
    op: Callable[..., Tensor],
    inputs: list[np.ndarray],
    rng: np.random.Generator,
    eps: float = FD_EPS,
    tol: float = FD_TOL,
) -> list[tuple[str, GradCheckReport]]:
    """Check d(sum(op(*inputs) * W))/d(input) for every input."""
    inputs = [np.array(x, dtype=np.float64) for x in inputs]
    probe = op(*[Tensor(x) for x in inputs])
    weights = None if probe.data.size == 1 else rng.standard_normal(probe.shape)

    def scalar(arrs) -> Tensor:
        return _contract(op(*arrs), weights)

    leaves = [Tensor(x.copy(), requires_grad=True) for x in inputs]
    backward(scalar(leaves))
    reports = []
    for i, leaf in enumerate(leaves):

        def fn(point, i=i):
            arrs = [Tensor(point if j == i else inputs[j]) for j in range(len(inputs))]
            return float(scalar(arrs).data)

        reports.append((f"{name}[arg{i}]", finite_diff_check(fn, inputs[i], leaf.grad, eps, tol)))
    return reports


def check_params(name: str, params, loss_fn: Callable[[], Tensor], eps=FD_EPS, tol=FD_TOL):
    """Check the gradient of ``loss_fn()`` with respect to a whole ParamStore."""
    params.zero_grad()
    backward(loss_fn())
    analytic = params.flat_grad()
    base = params.snapshot()
    names = params.names()
    shapes = [base[n].shape for n in names]
    sizes = [base[n].size for n in names]

    def fn(flat):
        off = 0
        values = {}
        for n, shape, size in zip(names, shapes, sizes):
            values[n] = flat[off : off + size].reshape(shape)
            off += size
        params.load(values)
        return float(loss_fn().data)

    report = finite_diff_check(fn, params.flat(), analytic, eps, tol)
    params.load(base)
    params.zero_grad()
    return [(name, report)]


def tiny_bag(seed: int = 0, n: int = 13, d_in: int = 6) -> InstanceBag:
    rng = np.random.default_rng(seed)
    cells = rng.choice(36, size=n, replace=False)
    coords = np.stack([cells % 6, cells // 6], axis=1) * 256 + rng.integers(0, 16, size=(n, 2))
    return InstanceBag("tiny", rng.standard_normal((n, d_in)), coords, 1)


TINY_CONFIG = ModelConfig(d_in=6, dim=8, k=2, blocks=2, lam=512.0, encoder="prope", classes=2)


def run_gradchecks(seed: int = 0) -> list[tuple[str, GradCheckReport]]:
    rng = np.random.default_rng(seed)
    r = rng.standard_normal
    L, D = 8, 8
    results: list[tuple[str, GradCheckReport]] = []
    results += check_op("matmul", matmul, [r((3, 4)), r((4, 5))], rng)
    results += check_op("linear", linear, [r((5, 4)), r((4, 3)), r(3)], rng)
    results += check_op("layer_norm", layer_norm, [r((4, 6)), 1.0 + 0.1 * r(6), r(6)], rng)
    results += check_op("gelu", gelu, [r((4, 5)) * 2], rng)
    results += check_op("softmax_ce", lambda z: softmax_cross_entropy(z, 1), [r(4)], rng)
    mask = np.array([True, False, True, True, False, True])
    results += check_op("masked_mean", lambda x: masked_mean(x, mask), [r((6, 3))], rng)
    results += check_op("total", total, [r((3, 3))], rng)
    for layer in (0, 1, 2):
        spec = ShiftSpec(layer=layer, k=2)
        results += check_op(f"shift_fwd_l{layer}", lambda x, s=spec: shift_folds(x, s), [r((L, D))], rng)
        results += check_op(
            f"shift_inv_l{layer}", lambda x, s=spec: shift_folds(x, s, inverse=True), [r((L, D))], rng
        )
    polar = PolarCoords(rho=np.abs(r(L)) * 3, alpha=rng.uniform(-np.pi, np.pi, L))
    results += check_op("prope", lambda h: apply_prope(h, polar), [r((L, D))], rng)
    results += check_op("rope1d", lambda h: apply_rope_1d(h, np.arange(L)), [r((L, D))], rng)
    px, py = rng.uniform(0, 5, L), rng.uniform(0, 5, L)
    results += check_op("rope2d", lambda h: apply_rope_2d(h, px, py), [r((L, D))], rng)
    results += check_op("sinusoidal", lambda h: encode(h, "sinusoidal", np.zeros((L, 2))), [r((L, D))], rng)

    x = r((L, D))
    weights = r((L, D))
    for label, stack in (
        ("sac_block", SacStack(D, 2, 1, seed=seed, dtype=np.float64)),
        ("sac_stack", SacStack(D, 2, 2, seed=seed, dtype=np.float64)),
        ("chord_layer", ChordStack(D, 1, seed=seed, dtype=np.float64)),
        ("cycle_layer", CycleStack(D, 1, stepsize=3, seed=seed, dtype=np.float64)),
    ):
        results += check_op(f"{label}[input]", lambda h, s=stack: s(h), [x], rng)
        results += check_params(
            f"{label}[params]", stack.params, lambda s=stack: _contract(s(Tensor(x)), weights)
        )

    model = build_model(TINY_CONFIG, seed=seed, dtype=np.float64)
    prep = model.prepare(tiny_bag(seed))
    results += check_params("full_model", model.params, lambda: bag_loss(model, prep))
    return results
