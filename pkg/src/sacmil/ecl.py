"""Effective context length by single-instance perturbation.

Two forward passes over the same random sequence, the second with the
middle instance zeroed; an output position counts as changed when the L2
norm of its difference exceeds ``tol``.  Passes are single-threaded numpy,
so untouched positions come out bitwise identical and ``tol`` only has to be
positive.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bagio import atomic_write_text
from .baselines import ChannelMLPStack, ChordStack, CycleStack
from .errors import ConfigError, ContractError
from .numerics import Tensor
from .sac import SacStack

MIXERS = ("sac", "chord", "cycle", "none")
DEFAULT_TOL = 1e-12


@dataclass
class EclRecord:
    mixer: str
    length: int
    layers: int
    perturb_idx: int
    changed: int
    diffs: np.ndarray = field(repr=False)
    runtime_ms: float = 0.0
    tol: float = DEFAULT_TOL

    @property
    def changed_indices(self) -> np.ndarray:
        return np.flatnonzero(self.diffs > self.tol)


def build_mixer(kind: str, dim: int, layers: int, seed: int = 0, k: int = 16, stepsize: int = 6):
    if kind == "sac":
        return SacStack(dim, k, layers, seed=seed)
    if kind == "chord":
        return ChordStack(dim, layers, seed=seed)
    if kind == "cycle":
        return CycleStack(dim, layers, stepsize=stepsize, seed=seed)
    if kind == "none":
        return ChannelMLPStack(dim, layers, seed=seed)
    raise ConfigError(f"unknown mixer {kind!r}; choose from {MIXERS}")


def measure_ecl(mixer, length: int, dim: int, seed: int = 0, tol: float = DEFAULT_TOL) -> EclRecord:
    if length < 2:
        raise ContractError(f"ECL needs a sequence of at least 2 instances, got {length}")
    if tol <= 0:
        raise ContractError(f"tolerance must be positive, got {tol}")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((length, dim)).astype(mixer.params.dtype)
    mid = length // 2
    x0 = x.copy()
    x0[mid] = 0
    t0 = time.perf_counter()
    y = mixer(Tensor(x)).data
    y0 = mixer(Tensor(x0)).data
    runtime = (time.perf_counter() - t0) * 1000.0
    diffs = np.linalg.norm(y.astype(np.float64) - y0.astype(np.float64), axis=1)
    return EclRecord(
        mixer=mixer.kind,
        length=length,
        layers=len(mixer.specs) if hasattr(mixer, "specs") else len(mixer.layers),
        perturb_idx=mid,
        changed=int((diffs > tol).sum()),
        diffs=diffs,
        runtime_ms=runtime,
        tol=tol,
    )


def ecl_sweep(
    mixers,
    lengths,
    layer_counts,
    dim: int,
    seed: int = 0,
    k: int = 16,
    stepsize: int = 6,
    tol: float = DEFAULT_TOL,
) -> list[EclRecord]:
    """Cartesian sweep over mixer x length x depth, fresh seeded model per cell."""
    lengths = list(lengths)
    if any(L < 2 for L in lengths):
        raise ContractError(f"all lengths must be >= 2, got {lengths}")
    records = []
    for kind in mixers:
        for L in lengths:
            for n in layer_counts:
                mixer = build_mixer(kind, dim, n, seed=seed, k=k, stepsize=stepsize)
                records.append(measure_ecl(mixer, L, dim, seed=seed, tol=tol))
    return records


ECL_HEADER = "mixer,L,layers,perturb_idx,changed,runtime_ms"
DIFF_HEADER = "instance_index,l2_diff"


def diff_filename(rec: EclRecord, records) -> str:
    clash = sum(1 for r in records if r.mixer == rec.mixer and r.length == rec.length) > 1
    suffix = f"_{rec.layers}" if clash else ""
    return f"diffs_{rec.mixer}_{rec.length}{suffix}.csv"


def emit_report(records, out_dir) -> list[Path]:
    """Write ``ecl.csv`` and one ``diffs_*.csv`` per record; returns the paths."""
    records = list(records)
    if not records:
        raise ContractError("no ECL records to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [ECL_HEADER]
    for r in records:
        rows.append(f"{r.mixer},{r.length},{r.layers},{r.perturb_idx},{r.changed},{r.runtime_ms:.3f}")
    paths = [out / "ecl.csv"]
    atomic_write_text(paths[0], "\n".join(rows) + "\n")
    for r in records:
        p = out / diff_filename(r, records)
        lines = [DIFF_HEADER] + [f"{i},{float(d)!r}" for i, d in enumerate(r.diffs)]
        atomic_write_text(p, "\n".join(lines) + "\n")
        paths.append(p)
    return paths
