"""Spatial regions: farthest point sampling, greedy nearest-neighbour
claiming and region-contiguous arrangement of a bag's instances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ContractError


def _coords(coords) -> np.ndarray:
    c = np.asarray(coords)
    if c.ndim != 2 or c.shape[1] != 2:
        raise ContractError(f"coordinates must be (n, 2), got {c.shape}")
    if c.shape[0] == 0:
        raise ContractError("empty coordinate set")
    return c.astype(np.int64)


def fps(coords, count: int, seed_index: int = 0) -> np.ndarray:
    """Farthest point sampling from ``seed_index``; ties go to the lowest index."""
    c = _coords(coords)
    n = c.shape[0]
    if not 1 <= count <= n:
        raise ContractError(f"cannot select {count} centers from {n} points")
    if not 0 <= seed_index < n:
        raise ContractError(f"seed index {seed_index} out of range for {n} points")
    return kernels.fps(c, count, seed_index)


@dataclass(frozen=True)
class Partition:
    """Result of dividing ``n`` instances into ``R`` regions of ``k`` slots.

    ``permutation[s]`` is the original instance occupying arranged slot
    ``s``; pad slots repeat their region's center and are flagged in
    ``pad_mask``.
    """

    k: int
    centers: np.ndarray
    assignment: np.ndarray
    permutation: np.ndarray
    pad_mask: np.ndarray

    @property
    def num_regions(self) -> int:
        return int(self.centers.size)

    @property
    def num_instances(self) -> int:
        return int(self.assignment.size)

    @property
    def length(self) -> int:
        return int(self.permutation.size)

    def region_members(self, r: int) -> np.ndarray:
        block = slice(r * self.k, (r + 1) * self.k)
        return self.permutation[block][~self.pad_mask[block]]

    def first_slot(self) -> np.ndarray:
        """Arranged slot of every original instance (its unique non-pad slot)."""
        slots = np.empty(self.num_instances, dtype=np.int64)
        real = np.flatnonzero(~self.pad_mask)
        slots[self.permutation[real]] = real
        return slots


def assign_regions(coords, centers, k: int) -> Partition:
    """Each center, in order, claims itself and its ``k - 1`` nearest unclaimed
    non-center instances.  Members are listed by ascending distance to the
    center (center first, ties to the lowest index); short regions are padded
    with copies of the center."""
    c = _coords(coords)
    centers = np.asarray(centers, dtype=np.int64)
    n = c.shape[0]
    if k < 1:
        raise ContractError(f"region size k must be >= 1, got {k}")
    if centers.ndim != 1 or centers.size == 0:
        raise ContractError("need at least one region center")
    if centers.min() < 0 or centers.max() >= n or np.unique(centers).size != centers.size:
        raise ContractError("centers must be distinct valid indices")
    if centers.size * k < n:
        raise ContractError(f"{centers.size} regions of size {k} cannot hold {n} instances")
    members, pad = kernels.assign_greedy(c, centers, k)
    perm = members.reshape(-1)
    pad_mask = pad.reshape(-1)
    assignment = np.full(n, -1, dtype=np.int64)
    region_of_slot = np.repeat(np.arange(centers.size), k)
    assignment[perm[~pad_mask]] = region_of_slot[~pad_mask]
    if (assignment < 0).any():
        raise ContractError("some instances were not claimed by any region")
    return Partition(k=k, centers=centers, assignment=assignment, permutation=perm, pad_mask=pad_mask)


def canonical_order(coords) -> np.ndarray:
    """Indices sorting instances by (x, y), then original index."""
    c = _coords(coords)
    return np.lexsort((np.arange(c.shape[0]), c[:, 1], c[:, 0]))


def partition_bag(coords, k: int) -> Partition:
    """Full partitioning pipeline in a row-order independent way.

    Instances are first put in lexicographic coordinate order, so the FPS seed
    (the smallest coordinate) and every tie-break are independent of how the
    bag's rows happen to be stored.  Indices in the result refer to the
    caller's original rows.
    """
    c = _coords(coords)
    if k < 1:
        raise ContractError(f"region size k must be >= 1, got {k}")
    n = c.shape[0]
    order = canonical_order(c)
    sorted_c = c[order]
    count = -(-n // k)
    centers = fps(sorted_c, count, 0)
    part = assign_regions(sorted_c, centers, k)
    assignment = np.empty(n, dtype=np.int64)
    assignment[order] = part.assignment
    return Partition(
        k=k,
        centers=order[part.centers],
        assignment=assignment,
        permutation=order[part.permutation],
        pad_mask=part.pad_mask,
    )


def arrange(features, coords, partition: Partition):
    """Gather rows into arranged order.

    Returns ``(features, coords, pad_mask, permutation)`` where region ``r``
    occupies slots ``[r*k, (r+1)*k)``.
    """
    f = np.asarray(features)
    c = np.asarray(coords)
    if f.shape[0] != c.shape[0] or f.shape[0] != partition.num_instances:
        raise ContractError(
            f"{f.shape[0]} feature rows, {c.shape[0]} coordinates and a partition "
            f"of {partition.num_instances} instances disagree"
        )
    p = partition.permutation
    return f[p], c[p], partition.pad_mask.copy(), p.copy()
