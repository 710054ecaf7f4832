import hashlib

import numpy as np
import pytest

from sacmil.errors import ContractError
from sacmil.synthetic import SyntheticSpec, generate_bags, generate_synthetic
from sacmil.bagio import load_manifest_bags


def digest(folder):
    h = hashlib.sha256()
    for p in sorted(folder.rglob("*")):
        if p.is_file():
            h.update(p.relative_to(folder).as_posix().encode())
            h.update(p.read_bytes())
    return h.hexdigest()


def test_positive_count():
    bags = generate_bags(SyntheticSpec(bags=200, min_n=20, max_n=30), seed=0)
    assert sum(b.label for b in bags) == 100


def test_instance_labels_follow_bag_labels():
    for bag in generate_bags(SyntheticSpec(bags=30), seed=1):
        if bag.label:
            assert bag.instance_labels.sum() >= 1
        else:
            assert bag.instance_labels.sum() == 0


def test_tumor_cluster_is_contiguous():
    spec = SyntheticSpec(bags=20)
    for bag in generate_bags(spec, seed=2):
        if not bag.label:
            continue
        cells = bag.coords // 256
        tumor = cells[bag.instance_labels == 1]
        # every tumor cell lies within the radius of some common centre cell
        spread = np.sqrt(((tumor[:, None] - tumor[None]) ** 2).sum(-1)).max()
        assert spread <= 2 * spec.cluster_radius + 1e-9


def test_coordinates_unique_and_nonnegative():
    for bag in generate_bags(SyntheticSpec(bags=10), seed=3):
        assert (bag.coords >= 0).all()
        assert len({tuple(c) for c in bag.coords}) == bag.n


def test_files_deterministic(tmp_path):
    spec = SyntheticSpec(bags=6, min_n=5, max_n=9)
    generate_synthetic(spec, tmp_path / "a", seed=5)
    generate_synthetic(spec, tmp_path / "b", seed=5)
    assert digest(tmp_path / "a") == digest(tmp_path / "b")
    assert len(load_manifest_bags(tmp_path / "a" / "manifest.csv")) == 6


@pytest.mark.parametrize(
    "kw", [dict(bags=1), dict(min_n=0), dict(min_n=10, max_n=5), dict(positive_fraction=0.0), dict(dim=0)]
)
def test_degenerate(kw):
    with pytest.raises(ContractError):
        generate_bags(SyntheticSpec(**kw))
