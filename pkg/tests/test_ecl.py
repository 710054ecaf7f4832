import csv

import numpy as np
import pytest

from sacmil.baselines import chord_reach, cycle_footprint
from sacmil.ecl import build_mixer, ecl_sweep, emit_report, measure_ecl
from sacmil.errors import ConfigError, ContractError


def test_channel_mlp_changes_only_itself():
    rec = measure_ecl(build_mixer("none", 32, 3), 256, 32)
    assert rec.changed == 1
    assert rec.changed_indices.tolist() == [128]


def test_sac_full_reach_small():
    rec = measure_ecl(build_mixer("sac", 32, 3, k=4), 64, 32)
    assert rec.changed == 64
    assert (rec.diffs > rec.tol).all()


@pytest.mark.parametrize("n,lo,hi", [(1, 128, 132), (2, 128, 144), (3, 128, 192), (4, 0, 256)])
def test_layer_sweep_aligned_blocks(n, lo, hi):
    rec = measure_ecl(build_mixer("sac", 32, n, k=4), 256, 32)
    assert rec.changed_indices.tolist() == list(range(lo, hi))


def test_unaffected_outputs_are_exactly_equal():
    # which is why the threshold choice does not matter
    for kind in ("sac", "chord", "cycle", "none"):
        rec = measure_ecl(build_mixer(kind, 32, 3), 1024, 32)
        outside = np.setdiff1d(np.arange(1024), rec.changed_indices)
        assert (rec.diffs[outside] == 0).all()
        assert rec.diffs[rec.changed_indices].min() > 1e-6


def test_sweep_matches_oracles():
    recs = {(r.mixer, r.length): r for r in ecl_sweep(["sac", "chord", "cycle"], [256, 1024], [3], 32)}
    for L in (256, 1024):
        assert recs["sac", L].changed == L
        assert recs["cycle", L].changed == cycle_footprint(3, 6)
        assert recs["chord", L].changed == len(chord_reach(L, 3)) < L


def test_errors():
    with pytest.raises(ContractError):
        measure_ecl(build_mixer("sac", 32, 1), 1, 32)
    with pytest.raises(ConfigError):
        build_mixer("attention", 32, 1)


def test_emit_report(tmp_path):
    rec = measure_ecl(build_mixer("cycle", 32, 3), 64, 32)
    paths = emit_report([rec], tmp_path)
    assert sorted(p.name for p in paths) == ["diffs_cycle_64.csv", "ecl.csv"]
    rows = list(csv.reader((tmp_path / "ecl.csv").open()))
    assert rows[0] == ["mixer", "L", "layers", "perturb_idx", "changed", "runtime_ms"]
    assert rows[1][:5] == ["cycle", "64", "3", "32", "16"]
    diff_rows = list(csv.reader((tmp_path / "diffs_cycle_64.csv").open()))
    assert diff_rows[0] == ["instance_index", "l2_diff"]
    assert len(diff_rows) == 65
    assert float(diff_rows[33][1]) == rec.diffs[32]


def test_layer_sweep_file_names(tmp_path):
    recs = ecl_sweep(["sac"], [64], [1, 2], 32, k=4)
    names = sorted(p.name for p in emit_report(recs, tmp_path))
    assert names == ["diffs_sac_64_1.csv", "diffs_sac_64_2.csv", "ecl.csv"]
