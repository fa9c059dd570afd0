import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from accordant import GroupedDataset, accordance_report, is_rt_accordant
from accordant.model import AccordanceParams, ParameterError, count_table, forced_count


def test_dataset_group_index_is_consistent():
    d = GroupedDataset.from_labels(np.arange(5.0), ["b", "a", "b", "c", "a"])
    assert d.n == 5 and d.rho == 1 and d.m == 3
    assert d.group_labels == ("b", "a", "c")
    assert [list(ix) for ix in d.group_index] == [[0, 2], [1, 4], [3]]
    assert sorted(np.concatenate(d.group_index)) == list(range(5))


@pytest.mark.parametrize(
    "points, groups",
    [
        (np.array([[0.0], [np.nan]]), [0, 0]),
        (np.zeros((0, 2)), []),
        (np.zeros((2, 1)), [0, 2]),
        (np.zeros((2, 1)), [0]),
    ],
)
def test_dataset_rejects_bad_input(points, groups):
    with pytest.raises(ParameterError):
        GroupedDataset(points, np.array(groups, dtype=int))


def test_dataset_is_read_only():
    d = GroupedDataset(np.zeros((2, 1)), np.array([0, 0]))
    with pytest.raises(ValueError):
        d.points[0, 0] = 1.0


@pytest.mark.parametrize("kwargs", [dict(k=0), dict(k=2, t=1.5), dict(k=2, tau=0), dict(k=2, delta=-1),
                                    dict(k=2, restarts=0), dict(k=2, init_mode="plusplus")])
def test_params_validation(kwargs):
    with pytest.raises(ParameterError):
        AccordanceParams(**kwargs)


def test_forced_count_is_ceiling_without_float_noise():
    assert forced_count(0.75, 4) == 3
    assert forced_count(0.75, 6) == 5
    assert forced_count(0.7, 10) == 7
    assert forced_count(0.0, 9) == 0
    assert forced_count(1.0, 9) == 9
    assert forced_count(0.1, 3) == 1


def test_report_three_of_four():
    d = GroupedDataset(np.zeros((4, 1)), np.zeros(4, dtype=int))
    (entry,) = accordance_report([0, 0, 0, 1], d, 0.75)
    assert (entry.group, entry.cluster, entry.fraction) == (0, 0, 0.75)


def test_report_single_cluster_reports_every_group():
    d = GroupedDataset(np.zeros((6, 1)), np.array([0, 1, 2, 0, 1, 2]))
    rep = accordance_report(np.zeros(6, dtype=int), d, 1.0)
    assert [(e.group, e.fraction) for e in rep] == [(0, 1.0), (1, 1.0), (2, 1.0)]


def test_report_even_split_is_absent():
    d = GroupedDataset(np.zeros((6, 1)), np.zeros(6, dtype=int))
    assert accordance_report([0, 0, 1, 1, 2, 2], d, 0.5) == []


def test_report_ties_pick_lowest_cluster():
    d = GroupedDataset(np.zeros((4, 1)), np.zeros(4, dtype=int))
    (entry,) = accordance_report([2, 2, 1, 1], d, 0.5)
    assert entry.cluster == 1


def test_is_rt_accordant_counts_groups():
    d = GroupedDataset(np.zeros((6, 1)), np.array([0, 0, 0, 0, 1, 1]))
    a = [0, 0, 0, 1, 0, 1]  # group 0: 3/4 in cluster 0; group 1: split
    assert is_rt_accordant(a, d, 1, 0.75)
    assert not is_rt_accordant(a, d, 2, 0.75)


def test_two_groups_accordant_in_same_cluster():
    # groups 1 and 3 both mostly in cluster 0 (the health-care outcome shape)
    groups = np.repeat(np.arange(5), 4)
    a = np.array([0, 1, 2, 3] + [0, 0, 0, 1] + [1, 2, 3, 0] + [0, 0, 0, 0] + [2, 3, 1, 0])
    d = GroupedDataset(np.zeros((20, 1)), groups)
    rep = accordance_report(a, d, 0.75)
    assert [(e.group, e.cluster) for e in rep] == [(1, 0), (3, 0)]
    assert is_rt_accordant(a, d, 2, 0.75)


labelings = st.integers(1, 4).flatmap(
    lambda k: st.tuples(st.just(k), st.lists(st.tuples(st.integers(0, k - 1), st.integers(0, 2)), min_size=3, max_size=30))
)


def _dataset(pairs):
    assignment = np.array([a for a, _ in pairs])
    raw = [g for _, g in pairs]
    return assignment, GroupedDataset.from_labels(np.zeros((len(pairs), 1)), raw)


@settings(max_examples=200, deadline=None)
@given(labelings)
def test_unfiltered_fractions_sum_to_one(data):
    k, pairs = data
    assignment, d = _dataset(pairs)
    counts = count_table(assignment, d, k)
    np.testing.assert_allclose((counts / d.group_sizes[:, None]).sum(axis=1), 1.0)


@settings(max_examples=200, deadline=None)
@given(labelings, st.floats(0, 1), st.floats(0, 1), st.integers(1, 3))
def test_accordance_monotone_in_t_and_r(data, t1, t2, r):
    _, pairs = data
    assignment, d = _dataset(pairs)
    lo, hi = sorted((t1, t2))
    r = min(r, d.m)
    if is_rt_accordant(assignment, d, r, hi):
        assert is_rt_accordant(assignment, d, r, lo)
    if r > 1 and is_rt_accordant(assignment, d, r, lo):
        assert is_rt_accordant(assignment, d, r - 1, lo)
