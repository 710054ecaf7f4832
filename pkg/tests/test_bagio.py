import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sacmil.bagio import (
    InstanceBag,
    ManifestEntry,
    bag_file_size,
    decode_bag,
    encode_bag,
    load_bag,
    load_manifest_bags,
    read_manifest,
    save_bag,
    write_manifest,
)
from sacmil.errors import BagFormatError, BagIOError, BagLengthError, ContractError


def random_bag(seed, n=5, d=3, labelled=True):
    rng = np.random.default_rng(seed)
    return InstanceBag(
        "b",
        rng.standard_normal((n, d)).astype(np.float32),
        rng.integers(0, 100000, size=(n, 2)).astype(np.int32),
        int(rng.integers(0, 2)),
        rng.integers(0, 2, n).astype(np.uint8) if labelled else None,
    )


def assert_same(a, b):
    assert a.features.tobytes() == b.features.tobytes()
    assert a.coords.tobytes() == b.coords.tobytes()
    assert a.label == b.label
    if a.instance_labels is None:
        assert b.instance_labels is None
    else:
        assert a.instance_labels.tobytes() == b.instance_labels.tobytes()


def test_minimal_file_size(tmp_path):
    bag = InstanceBag("x", np.zeros((1, 2), np.float32), np.zeros((1, 2), np.int32), 0)
    save_bag(bag, tmp_path / "x.sacb")
    assert (tmp_path / "x.sacb").stat().st_size == 33 == bag_file_size(1, 2, False)


@given(st.integers(1, 40), st.integers(1, 16), st.booleans(), st.integers(0, 2**31))
@settings(max_examples=100, deadline=None)
def test_round_trip_bitwise(n, d, labelled, seed):
    bag = random_bag(seed, n, d, labelled)
    assert_same(bag, decode_bag(encode_bag(bag)))


def test_round_trip_through_disk(tmp_path):
    bag = random_bag(0)
    save_bag(bag, tmp_path / "a.sacb")
    out = load_bag(tmp_path / "a.sacb")
    assert out.bag_id == "a"
    assert_same(bag, out)


def test_bad_magic_names_offset():
    data = bytearray(encode_bag(random_bag(1)))
    data[0:4] = b"NOPE"
    with pytest.raises(BagFormatError, match="offset 0"):
        decode_bag(bytes(data))


def test_truncated_reports_counts():
    data = encode_bag(random_bag(2, n=4, d=2, labelled=False))
    with pytest.raises(BagLengthError, match=f"expected {len(data)} bytes from header, got {len(data) - 3}"):
        decode_bag(data[:-3])


def test_empty_bag_rejected():
    bag = random_bag(3, n=1, d=1, labelled=False)
    data = bytearray(encode_bag(bag))
    data[5:9] = (0).to_bytes(4, "little")
    with pytest.raises(BagFormatError):
        decode_bag(bytes(data))


def test_construct_validation():
    with pytest.raises(ContractError):
        InstanceBag("x", np.zeros((0, 2)), np.zeros((0, 2)), 0)
    with pytest.raises(ContractError):
        InstanceBag("x", np.zeros((2, 2)), np.zeros((3, 2)), 0)


def test_fuzz_random_bytes_always_error():
    rng = np.random.default_rng(0)
    for i in range(1000):
        size = int(rng.integers(0, 200))
        data = rng.integers(0, 256, size=size, dtype=np.uint8).tobytes()
        if i % 2:
            data = b"SACB\x01" + data  # get past the magic check half the time
        with pytest.raises(BagIOError):
            decode_bag(data)


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        save_bag(random_bag(0), tmp_path / "missing" / "x.sacb")


class TestManifest:
    def test_round_trip(self, tmp_path):
        bags = [random_bag(i) for i in range(3)]
        entries = []
        for i, b in enumerate(bags):
            save_bag(b, tmp_path / f"b{i}.sacb")
            entries.append(ManifestEntry(f"b{i}", f"b{i}.sacb", b.label))
        write_manifest(entries, tmp_path / "m.csv")
        assert read_manifest(tmp_path / "m.csv") == entries
        loaded = load_manifest_bags(tmp_path / "m.csv")
        assert [b.bag_id for b in loaded] == ["b0", "b1", "b2"]
        for a, b in zip(bags, loaded):
            assert_same(a, b)

    def test_duplicate_ids(self, tmp_path):
        (tmp_path / "m.csv").write_text("bag_id,path,label\na,a.sacb,0\na,b.sacb,1\n")
        with pytest.raises(ContractError, match="duplicate"):
            read_manifest(tmp_path / "m.csv")

    def test_bad_header(self, tmp_path):
        (tmp_path / "m.csv").write_text("id,file,y\n")
        with pytest.raises(ContractError):
            read_manifest(tmp_path / "m.csv")

    def test_label_mismatch(self, tmp_path):
        bag = random_bag(0)
        save_bag(bag, tmp_path / "a.sacb")
        write_manifest([ManifestEntry("a", "a.sacb", 1 - bag.label)], tmp_path / "m.csv")
        with pytest.raises(ContractError):
            load_manifest_bags(tmp_path / "m.csv")
