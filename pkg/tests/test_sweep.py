import csv

import numpy as np
import pytest

from knotfield import sweep
from knotfield.critical import SeedingConfig
from knotfield.errors import ParameterError


@pytest.fixture(scope="module")
def unknot_result():
    return sweep.flatten_sweep("unknot", 1.0, 0.2, steps=5, n_base=256)


@pytest.fixture(scope="module")
def trefoil_result():
    return sweep.flatten_sweep("trefoil", 1.0, 0.5, steps=5, n_base=1024)


def test_argument_validation():
    with pytest.raises(ParameterError):
        sweep.flatten_sweep("granny", 1.0, 0.1, 10)
    with pytest.raises(ParameterError):
        sweep.flatten_sweep("unknot", 0.1, 1.0, 10)
    with pytest.raises(ParameterError):
        sweep.flatten_sweep("unknot", 1.0, 0.0, 10)
    with pytest.raises(ParameterError):
        sweep.flatten_sweep("unknot", 1.0, 0.1, 1)


def test_unknot_constant_single_zero(unknot_result):
    res = unknot_result
    assert all(r.zero_count == 1 for r in res.records)
    assert res.min_zero_count == 1
    bc = res.bound_check
    assert (bc["lower"], bc["upper"]) == (1, 1)
    assert bc["lower_pass"] and bc["upper_pass"]
    assert res.argmin_gamma_range == (0.2, 1.0)


def test_trefoil_plateau_seven(trefoil_result):
    res = trefoil_result
    assert [r.zero_count for r in res.records] == [7] * len(res.records)
    assert res.min_zero_count == 7
    assert res.bound_check["lower"] == 3
    assert res.bound_check["upper"] == 7
    assert res.bound_check["lower_pass"] and res.bound_check["upper_pass"]


def test_records_ordered_and_histogram_consistent(trefoil_result):
    gammas = [r.gamma for r in trefoil_result.records]
    assert gammas == sorted(gammas, reverse=True)
    for r in trefoil_result.records:
        assert sum(r.index_histogram.values()) == r.zero_count
        assert r.zero_count >= 1
        assert r.n_charges >= 1024


def test_even_jumps_between_unflagged(trefoil_result):
    recs = [r for r in trefoil_result.records]
    for hi, lo in zip(recs[:-1], recs[1:]):
        if not (hi.flagged or lo.flagged):
            assert (hi.zero_count - lo.zero_count) % 2 == 0


def test_schedule_refinement_invariance():
    # counts at shared gammas must not depend on intermediate steps
    coarse = sweep.flatten_sweep("trefoil", 1.0, 0.6, steps=3, n_base=512)
    fine = sweep.flatten_sweep("trefoil", 1.0, 0.6, steps=5, n_base=512)
    coarse_counts = {round(r.gamma, 12): r.zero_count for r in coarse.records}
    fine_counts = {round(r.gamma, 12): r.zero_count for r in fine.records}
    shared = set(coarse_counts) & set(fine_counts)
    assert shared  # endpoints at least
    for g in shared:
        assert coarse_counts[g] == fine_counts[g]


def test_geometric_schedule():
    res = sweep.flatten_sweep("unknot", 1.0, 0.25, steps=3, n_base=256,
                              schedule="geometric")
    gammas = [r.gamma for r in res.records]
    assert np.allclose(gammas, [1.0, 0.5, 0.25])


def test_csv_output(tmp_path, trefoil_result):
    path = tmp_path / "sweep.csv"
    sweep.write_sweep_csv(trefoil_result, path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["gamma", "zero_count", "index1_count", "index2_count",
                       "flags"]
    assert len(rows) == 1 + len(trefoil_result.records)
    first = rows[1]
    assert float(first[0]) == 1.0
    assert int(first[1]) == 7
    assert int(first[2]) + int(first[3]) == 7


def test_custom_config_passes_through():
    cfg = SeedingConfig(grid_resolution=24, z_inflation=2.0)
    res = sweep.flatten_sweep("unknot", 1.0, 0.5, steps=2, n_base=256,
                              config=cfg)
    assert res.min_zero_count == 1
