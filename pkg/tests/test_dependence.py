import math

import numpy as np
import pytest

from rwrs_lab.dependence import (ThetaBound, covariance_bound_check, summability_check, theta_bound,
                                 theta_bound_ma)
from rwrs_lab.scenery import Innovation, Profile, SceneryModel

GEO = SceneryModel.causal_ma(rho=0.5)
MA0 = SceneryModel.causal_ma(coeffs=[1.0])


def test_geometric_bound_values():
    # sum_{k>=2} 0.5^k = 0.5
    assert theta_bound_ma(GEO, "theta12", 2) == pytest.approx(0.5, abs=1e-12)
    assert theta_bound_ma(GEO, "theta12", 1) == pytest.approx(1.0, abs=1e-12)
    assert theta_bound_ma(GEO, "theta12", 1) >= theta_bound_ma(GEO, "theta12", 2)
    # theta_{1,1} uses E|eps| = sqrt(2/pi) for Gaussian innovations
    assert theta_bound_ma(GEO, "theta11", 2) == pytest.approx(0.5 * math.sqrt(2 / math.pi), abs=1e-12)


def test_ma0_bound_vanishes():
    for j in (1, 2, 10):
        assert theta_bound_ma(MA0, "theta12", j) == 0.0


def test_non_ma_rejected():
    with pytest.raises(ValueError):
        theta_bound_ma(SceneryModel.iid(), "theta12", 1)
    with pytest.raises(ValueError):
        theta_bound_ma(GEO, "theta3", 1)


def test_bound_monotone_and_vanishing():
    b = theta_bound(GEO)
    vals = [b.bound_at(j) for j in range(0, 80)]
    assert all(y <= x for x, y in zip(vals, vals[1:]))
    assert vals[-1] == 0.0
    assert b.summable


def test_bound_scales_with_sigma_sup():
    m = SceneryModel.causal_ma(rho=0.5, sigma=Profile.periodic(0.5, 4, 1.5))
    # truncated tail (<= 1e-12) scaled by sup sigma = 2
    assert theta_bound_ma(m, "theta12", 2) == pytest.approx(2.0 * 0.5, abs=2e-12)


def test_summability_geometric():
    sums, ok = summability_check(theta_bound(GEO), 1e-12)
    assert ok
    # closed form: sum_j 2 * 0.5^j = 4
    assert sums[-1] == pytest.approx(4.0, abs=1e-10)
    assert theta_bound(GEO).closed_form_sum() == pytest.approx(4.0, abs=1e-10)


def test_summability_ma0():
    sums, ok = summability_check(theta_bound(MA0), 1e-12)
    assert ok
    assert sums[-1] == pytest.approx(1.0)  # only the j = 0 term
    assert theta_bound(SceneryModel.iid()).bound_at(0) == 1.0


def test_summability_polynomial_list():
    coeffs = [1 / (k + 1) ** 2 for k in range(200)]
    m = SceneryModel.causal_ma(coeffs=coeffs)
    sums, ok = summability_check(theta_bound(m), 1e-12)
    assert ok
    # sum_j sum_{k>=j} a_k = sum_k (k+1) a_k = sum_k 1/(k+1)
    assert sums[-1] == pytest.approx(sum(1 / (k + 1) for k in range(200)), rel=1e-12)


def test_summability_reports_nonconvergence():
    sums, ok = summability_check(lambda j: 1.0 / (j + 1), 1e-12, lag_cap=1000)
    assert not ok
    assert len(sums) == 1001
    inf = ThetaBound(SceneryModel.heavy_tail(1.5), "theta12")
    assert not summability_check(inf)[1]


def test_exact_ma_covariance():
    # Cov at lag 1 = rho / (1 - rho^2) = 2/3
    assert float(GEO.covariance(0, 1)) == pytest.approx(2 / 3, abs=1e-12)
    assert float(GEO.covariance(0, 3)) == pytest.approx(0.125 / 0.75, abs=1e-12)


def test_covbound_iid_is_zero():
    rows = covariance_bound_check(SceneryModel.iid(), [1, 2, 5], 20000, seed=1)
    for r in rows:
        assert r.bound == 0.0
        assert r.empirical <= 3 * r.stderr
        assert r.ok


def test_covbound_ma_matches_closed_form():
    rows = covariance_bound_check(GEO, [1, 2, 3], 40000, seed=2)
    r1 = rows[0]
    assert r1.exact == pytest.approx(2 / 3, abs=1e-12)
    assert abs(r1.empirical - 2 / 3) <= 3 * r1.stderr + 1e-3
    for r in rows:
        assert r.ok
        assert r.bound == pytest.approx(math.sqrt(float(GEO.variance(0))) * theta_bound_ma(GEO, "theta12", r.lag))


@pytest.mark.parametrize("tr", ["plus", "minus"])
def test_covbound_lipschitz_transforms(tr):
    m = SceneryModel.causal_ma(rho=0.5, innovation=Innovation("centered_exp"), mu=Profile.periodic(1, 7))
    rows = covariance_bound_check(m, [1, 2, 4], 20000, seed=3, transform=tr)
    assert all(r.ok for r in rows)
    assert all(math.isnan(r.exact) for r in rows)


def test_covbound_needs_samples():
    with pytest.raises(ValueError):
        covariance_bound_check(GEO, [1], 9999, seed=0)
