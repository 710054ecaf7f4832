"""Compare the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Each kernel is timed on both backends (best of N) and the ratio printed,
followed by one full training step of a small model.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sacmil import kernels
from sacmil.model import ModelConfig, bag_loss, build_model
from sacmil.numerics import AdamState, adam_step, backward
from sacmil.synthetic import SyntheticSpec, generate_bags


def best_of(fn, repeats: int) -> float:
    fn()
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((4096, 32)).astype(np.float32)
    coords = rng.integers(0, 100_000, size=(2000, 2))
    centers = kernels.fps(coords, 2000 // 16, 0)
    g = rng.standard_normal(4096 * 32)

    model = build_model(ModelConfig(d_in=32, dim=32, k=8, blocks=3), seed=0)
    prep = model.prepare(generate_bags(SyntheticSpec(bags=2, min_n=96, max_n=96), seed=0)[0])
    state = AdamState.for_params(model.params)

    def step():
        backward(bag_loss(model, prep))
        adam_step(model.params, state)

    return [
        ("shift_folds L=4096 D=32 k=16", lambda: kernels.shift_folds(x, 16, 16, 256, False)),
        ("fps n=2000 R=125", lambda: kernels.fps(coords, 125, 0)),
        ("assign n=2000 k=16", lambda: kernels.assign_greedy(coords, centers, 16)),
        ("gelu 131072 values", lambda: kernels.gelu(g)),
        ("train step n=96 D=32 k=8", step),
    ]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()
    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; only the fallback can be timed")
    print(f"{'kernel':32s}" + "".join(f"{b:>14s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, fn in cases():
        times = {}
        for b in backends:
            with kernels.use_backend(b):
                times[b] = best_of(fn, args.repeats)
        row = f"{name:32s}" + "".join(f"{times[b] * 1e3:12.3f}ms" for b in backends)
        if len(backends) > 1:
            row += f"{times['python'] / times['compiled']:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
