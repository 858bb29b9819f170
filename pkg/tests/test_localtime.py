import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import all_rademacher_paths, pair_count, visit_count, z_direct
from rwrs_lab.localtime import (intersection, intersection_all, local_time, self_intersection,
                                z_from_profile, z_prefixes, z_statistic)
from rwrs_lab.scenery import Innovation, Profile, Scenery, SceneryModel, WindowOverflowError, gen_scenery
from rwrs_lab.walk import WalkPath

steps = st.lists(st.sampled_from([-2, -1, 0, 1, 1, -1, 3]), min_size=0, max_size=80)


def path_from(steps_):
    return np.concatenate([[0], np.cumsum(steps_)]).astype(np.int64)


def linear_scenery(lo, hi):
    sites = np.arange(lo, hi + 1)
    return Scenery(lo, hi, sites.astype(float), SceneryModel.iid())


def test_local_time_examples():
    assert local_time([0]).as_dict() == {0: 1}
    prof = local_time([0, 1, 0])
    assert prof.as_dict() == {0: 2, 1: 1}
    assert self_intersection(prof) == 5
    assert intersection(prof, 1) == 2
    assert intersection(prof, -1) == 2
    assert intersection(prof, 0) == 5
    assert intersection(prof, 5) == 0


def test_straight_path():
    n = 40
    prof = local_time(np.arange(n + 1))
    assert self_intersection(prof) == n + 1


def test_ssrw_mean_alpha_at_two():
    paths = all_rademacher_paths(2)
    vals = [self_intersection(local_time(p)) for p in paths]
    assert sorted(vals) == [3, 3, 5, 5]
    assert np.mean(vals) == 4


@given(steps)
def test_profile_invariants(st_):
    s = path_from(st_)
    n = len(s) - 1
    prof = local_time(s)
    assert prof.total == n + 1
    m = np.max(np.abs(s))
    assert all(abs(i) <= m for i in prof.sites.tolist())
    for i in set(s.tolist()) | {m + 1, -m - 1}:
        assert prof[i] == visit_count(s.tolist(), i)


@given(steps)
def test_intersection_matches_double_sum(st_):
    s = path_from(st_)
    prof = local_time(s)
    r = int(np.ptp(s))
    for i in range(-r - 1, r + 2):
        a = intersection(prof, i)
        assert a == pair_count(s, i)
        assert a == intersection(prof, -i)
    shifts, ac = intersection_all(prof)
    assert ac.sum() == (len(s)) ** 2
    assert all(ac[k] == intersection(prof, int(i)) for k, i in enumerate(shifts))


@given(steps)
def test_cauchy_schwarz_lower_bound(st_):
    s = path_from(st_)
    prof = local_time(s)
    assert self_intersection(prof) * prof.distinct >= (len(s)) ** 2


def test_sparse_and_dense_paths_agree():
    s = np.array([0, 10**6, -(10**6), 0, 5])
    prof = local_time(s)
    assert prof.as_dict() == {-(10**6): 1, 0: 2, 5: 1, 10**6: 1}
    assert self_intersection(prof) == 7
    assert intersection(prof, 10**6) == 4  # N(1e6)N(0) + N(0)N(-1e6)
    assert intersection(prof, 10**6) == pair_count(s, 10**6)


def test_z_examples():
    one = Scenery(-10, 10, np.ones(21), SceneryModel.iid(Innovation("constant", 1.0)))
    s = np.array([0, 1, 2, 1, 0, -1])
    assert z_statistic(s, one) == len(s)
    assert z_statistic([0, 1, 0], linear_scenery(-2, 2)) == 1.0
    assert z_prefixes([0, 1, 0], linear_scenery(-2, 2)).tolist() == [0.0, 1.0, 1.0]


@given(steps, st.integers(0, 2**32))
def test_z_representations_agree(st_, seed):
    s = path_from(st_)
    m = int(np.max(np.abs(s)))
    sc = gen_scenery(SceneryModel.causal_ma(rho=0.4, mu=Profile.periodic(1, 3)), (-m, m), seed)
    prof = local_time(s)
    assert z_statistic(s, sc, exact=True) == z_from_profile(prof, sc, exact=True)
    assert z_statistic(s, sc) == pytest.approx(z_from_profile(prof, sc), rel=1e-12, abs=1e-9)
    ref = z_direct(s.tolist(), dict(zip(range(-m, m + 1), sc.values.tolist())))
    assert z_statistic(s, sc) == pytest.approx(ref, rel=1e-12, abs=1e-9)
    assert z_prefixes(s, sc)[-1] == pytest.approx(ref, rel=1e-12, abs=1e-9)


def test_window_violation_raises():
    sc = gen_scenery(SceneryModel.iid(), (-2, 2), 0)
    with pytest.raises(WindowOverflowError):
        z_statistic(WalkPath(np.array([0, 1, 2, 3])), sc)
    with pytest.raises(WindowOverflowError):
        z_prefixes([0, -1, -2, -3], sc)
