"""Instance bags and their on-disk representation.

Binary layout (little-endian, 17-byte header)::

    offset  size  field
    0       4     magic b"SACB"
    4       1     version (1)
    5       4     n, instance count (uint32)
    9       4     d, feature width (uint32)
    13      2     bag label (uint16)
    15      2     instance-label flag, 0 or 1 (uint16)
    17      4nd   features, float32, row-major
    ..      8n    coordinates, (x, y) int32 pairs
    ..      n     instance labels, uint8 (only when flagged)
"""

from __future__ import annotations

import csv
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BagFormatError, BagLengthError, ContractError

MAGIC = b"SACB"
VERSION = 1
_HEADER = struct.Struct("<4sBIIHH")
HEADER_SIZE = _HEADER.size


@dataclass
class InstanceBag:
    bag_id: str
    features: np.ndarray
    coords: np.ndarray
    label: int
    instance_labels: np.ndarray | None = None

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float32)
        self.coords = np.ascontiguousarray(self.coords, dtype=np.int32)
        if self.features.ndim != 2 or self.features.shape[0] < 1:
            raise ContractError(f"bag {self.bag_id}: features must be (n>=1, d), got {self.features.shape}")
        n = self.features.shape[0]
        if self.coords.shape != (n, 2):
            raise ContractError(f"bag {self.bag_id}: {n} instances but coords {self.coords.shape}")
        if (self.coords < 0).any():
            raise ContractError(f"bag {self.bag_id}: coordinates must be non-negative")
        if self.label < 0:
            raise ContractError(f"bag {self.bag_id}: negative label {self.label}")
        if self.instance_labels is not None:
            self.instance_labels = np.ascontiguousarray(self.instance_labels, dtype=np.uint8)
            if self.instance_labels.shape != (n,):
                raise ContractError(f"bag {self.bag_id}: instance labels must have length {n}")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


def bag_file_size(n: int, d: int, with_instance_labels: bool) -> int:
    return HEADER_SIZE + 4 * n * d + 8 * n + (n if with_instance_labels else 0)


def atomic_write_bytes(path, data: bytes) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def encode_bag(bag: InstanceBag) -> bytes:
    flagged = bag.instance_labels is not None
    if bag.label > 0xFFFF:
        raise ContractError(f"bag label {bag.label} does not fit the 16-bit header field")
    parts = [
        _HEADER.pack(MAGIC, VERSION, bag.n, bag.d, bag.label, int(flagged)),
        bag.features.astype("<f4").tobytes(),
        bag.coords.astype("<i4").tobytes(),
    ]
    if flagged:
        parts.append(bag.instance_labels.tobytes())
    return b"".join(parts)


def decode_bag(data: bytes, bag_id: str = "") -> InstanceBag:
    if len(data) < HEADER_SIZE:
        raise BagLengthError(f"header needs {HEADER_SIZE} bytes, file has {len(data)}")
    magic, version, n, d, label, flag = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BagFormatError(f"bad magic {magic!r} at offset 0, expected {MAGIC!r}")
    if version != VERSION:
        raise BagFormatError(f"unsupported version {version} at offset 4")
    if n == 0:
        raise BagFormatError("empty bag (n = 0) at offset 5")
    if d == 0:
        raise BagFormatError("zero feature width at offset 9")
    if flag not in (0, 1):
        raise BagFormatError(f"instance-label flag {flag} at offset 15 must be 0 or 1")
    expected = bag_file_size(n, d, bool(flag))
    if len(data) != expected:
        raise BagLengthError(f"expected {expected} bytes from header, got {len(data)}")
    off = HEADER_SIZE
    feats = np.frombuffer(data, dtype="<f4", count=n * d, offset=off).reshape(n, d)
    off += 4 * n * d
    coords = np.frombuffer(data, dtype="<i4", count=2 * n, offset=off).reshape(n, 2)
    off += 8 * n
    inst = None
    if flag:
        inst = np.frombuffer(data, dtype=np.uint8, count=n, offset=off)
        if inst.max() > 1:
            raise BagFormatError(f"instance labels at offset {off} must be 0 or 1")
    if (coords < 0).any():
        raise BagFormatError(f"negative coordinate at offset {HEADER_SIZE + 4 * n * d}")
    if not np.isfinite(feats).all():
        raise BagFormatError("non-finite feature value")
    return InstanceBag(bag_id, feats.copy(), coords.copy(), int(label), None if inst is None else inst.copy())


def save_bag(bag: InstanceBag, path) -> None:
    atomic_write_bytes(path, encode_bag(bag))


def load_bag(path, bag_id: str | None = None) -> InstanceBag:
    path = Path(path)
    return decode_bag(path.read_bytes(), bag_id if bag_id is not None else path.stem)


@dataclass(frozen=True)
class ManifestEntry:
    bag_id: str
    path: str
    label: int


MANIFEST_HEADER = ["bag_id", "path", "label"]


def write_manifest(entries: list[ManifestEntry], path) -> None:
    lines = [",".join(MANIFEST_HEADER)]
    lines += [f"{e.bag_id},{e.path},{e.label}" for e in entries]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_manifest(path) -> list[ManifestEntry]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != MANIFEST_HEADER:
            raise ContractError(f"manifest header must be {','.join(MANIFEST_HEADER)}, got {header}")
        entries = []
        seen = set()
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise ContractError(f"manifest row {row} must have 3 fields")
            bag_id, rel, label = row
            if bag_id in seen:
                raise ContractError(f"duplicate bag_id {bag_id!r} in manifest")
            seen.add(bag_id)
            entries.append(ManifestEntry(bag_id, rel, int(label)))
    return entries


def load_manifest_bags(path) -> list[InstanceBag]:
    """Load every bag listed in a manifest; paths resolve next to the manifest."""
    path = Path(path)
    bags = []
    for e in read_manifest(path):
        bag = load_bag(path.parent / e.path, e.bag_id)
        if bag.label != e.label:
            raise ContractError(f"bag {e.bag_id}: manifest label {e.label} but file label {bag.label}")
        bags.append(bag)
    return bags
