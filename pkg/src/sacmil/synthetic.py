"""Synthetic spatial MIL bags standing in for slide feature dumps.

Each bag is a patch of "tissue": instances on a jittered grid inside an
irregular blob.  Background features are standard Gaussian.  A positive bag
also carries one spatially contiguous tumor cluster whose instances are
shifted along a shared direction.  The default shift is twice the noise
scale along that direction yet moves the feature norm by only half its
spread, so one instance is a noisy call while the whole cluster is not.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bagio import InstanceBag, ManifestEntry, save_bag, write_manifest
from .errors import ContractError

PATCH = 256


@dataclass(frozen=True)
class SyntheticSpec:
    bags: int = 200
    min_n: int = 48
    max_n: int = 96
    dim: int = 32
    cluster_radius: float = 3.0
    positive_fraction: float = 0.5
    shift: float = 2.0

    def validate(self) -> "SyntheticSpec":
        if self.bags < 2:
            raise ContractError(f"need at least 2 bags, got {self.bags}")
        if not 1 <= self.min_n <= self.max_n:
            raise ContractError(f"invalid instance range [{self.min_n}, {self.max_n}]")
        if self.dim < 1:
            raise ContractError(f"feature width must be positive, got {self.dim}")
        if self.cluster_radius <= 0:
            raise ContractError("cluster radius must be positive")
        n_pos = self.positives()
        if n_pos < 1 or n_pos >= self.bags:
            raise ContractError(
                f"positive fraction {self.positive_fraction} of {self.bags} bags does not give both classes"
            )
        return self

    def positives(self) -> int:
        return int(round(self.bags * self.positive_fraction))


def _tissue_cells(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` grid cells forming one irregular connected-looking blob."""
    side = int(np.ceil(np.sqrt(n))) * 2 + 4
    yy, xx = np.mgrid[0:side, 0:side]
    mask = np.zeros((side, side), dtype=bool)
    centre = np.array([side / 2, side / 2])
    for _ in range(rng.integers(3, 6)):
        c = centre + rng.normal(scale=side / 8, size=2)
        r = rng.uniform(0.2, 0.35) * side
        mask |= (xx - c[0]) ** 2 + (yy - c[1]) ** 2 <= r * r
    cells = np.stack([xx[mask], yy[mask]], axis=1)
    if cells.shape[0] < n:
        cells = np.stack([xx.ravel(), yy.ravel()], axis=1)
    seed_cell = cells[rng.integers(cells.shape[0])]
    d = ((cells - seed_cell) ** 2).sum(axis=1) + rng.uniform(0, 4, size=cells.shape[0])
    return cells[np.argsort(d, kind="stable")[:n]]


def make_bag(bag_id: str, positive: bool, spec: SyntheticSpec, direction: np.ndarray, rng) -> InstanceBag:
    n = int(rng.integers(spec.min_n, spec.max_n + 1))
    cells = _tissue_cells(n, rng)
    offset = rng.integers(0, 40, size=2) * PATCH
    coords = cells * PATCH + offset + rng.integers(0, PATCH // 8, size=(n, 2))
    feats = rng.standard_normal((n, spec.dim))
    inst = np.zeros(n, dtype=np.uint8)
    if positive:
        centre = cells[rng.integers(n)]
        dist = np.sqrt(((cells - centre) ** 2).sum(axis=1))
        tumor = dist <= spec.cluster_radius
        feats[tumor] += spec.shift * direction
        inst[tumor] = 1
    return InstanceBag(bag_id, feats.astype(np.float32), coords.astype(np.int32), int(positive), inst)


def generate_bags(spec: SyntheticSpec, seed: int = 0) -> list[InstanceBag]:
    spec.validate()
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(spec.dim)
    direction /= np.linalg.norm(direction)
    labels = np.zeros(spec.bags, dtype=bool)
    labels[: spec.positives()] = True
    labels = rng.permutation(labels)
    return [make_bag(f"bag{i:04d}", bool(labels[i]), spec, direction, rng) for i in range(spec.bags)]


def generate_synthetic(spec: SyntheticSpec, out_dir, seed: int = 0) -> Path:
    """Write bag files under ``out_dir/bags`` and a manifest; returns the manifest path."""
    out = Path(out_dir)
    (out / "bags").mkdir(parents=True, exist_ok=True)
    entries = []
    for bag in generate_bags(spec, seed):
        rel = f"bags/{bag.bag_id}.sacb"
        save_bag(bag, out / rel)
        entries.append(ManifestEntry(bag.bag_id, rel, bag.label))
    manifest = out / "manifest.csv"
    write_manifest(entries, manifest)
    return manifest
