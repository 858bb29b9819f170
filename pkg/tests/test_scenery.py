import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rwrs_lab._rng import SAMPLE_DOMAIN, derive_seeds
from rwrs_lab.scenery import (Innovation, Profile, SceneryModel, WindowOverflowError,
                              gen_scenery, geometric_coeffs, scenery_mean, site_values,
                              uniform_integrability_diagnostic)

MA = SceneryModel.causal_ma(rho=0.5, mu=Profile.periodic(1, 7))
MODELS = [
    SceneryModel.iid(),
    SceneryModel.iid(Innovation("rademacher"), sigma=Profile.periodic(0.5, 3, 1.0)),
    MA,
    SceneryModel.causal_ma(coeffs=[1 / (k + 1) ** 2 for k in range(30)], innovation=Innovation("centered_exp")),
    SceneryModel.heavy_tail(1.5),
]


def test_degenerate_scenery():
    m = SceneryModel.iid(Innovation("constant", 1.0))
    s = gen_scenery(m, (-20, 20), seed=3)
    assert np.all(s.values == 1.0)


def test_ma0_reduces_to_iid():
    iid = SceneryModel.iid()
    ma0 = SceneryModel.causal_ma(coeffs=[1.0])
    a = gen_scenery(iid, (-30, 30), seed=9)
    b = gen_scenery(ma0, (-30, 30), seed=9)
    assert np.array_equal(a.values, b.values)


@pytest.mark.parametrize("model", MODELS)
@given(seed=st.integers(0, 2**64 - 1), small=st.integers(0, 10), extra=st.integers(1, 50))
def test_window_growth_consistency(model, seed, small, extra):
    a = gen_scenery(model, (-small, small), seed)
    b = gen_scenery(model, (-small - extra, small + extra), seed)
    assert np.array_equal(a.values, b.values[extra:extra + 2 * small + 1])


@pytest.mark.parametrize("model", MODELS)
def test_site_values_agree_with_window(model):
    s = gen_scenery(model, (-15, 15), seed=77)
    v = site_values(model, [-15, -3, 0, 4, 15], [77])[0]
    assert np.allclose(v, s.at([-15, -3, 0, 4, 15]), rtol=0, atol=1e-12)


@given(c=st.floats(-100, 100, allow_nan=False), seed=st.integers(0, 2**32))
def test_mu_shift_commutes(c, seed):
    base = SceneryModel.causal_ma(rho=0.3, mu=Profile.periodic(1.0, 4))
    shifted = SceneryModel.causal_ma(rho=0.3, mu=Profile.periodic(1.0, 4, offset=c))
    a = gen_scenery(base, (-10, 10), seed).values
    b = gen_scenery(shifted, (-10, 10), seed).values
    assert np.allclose(b - a, c, rtol=0, atol=1e-12)


def test_mu_shift_exact_for_constant_profile():
    a = gen_scenery(SceneryModel.iid(), (-50, 50), 4).values
    b = gen_scenery(SceneryModel.iid(mu=Profile.constant(0.25)), (-50, 50), 4).values
    assert np.array_equal(b, a + 0.25)


def test_scenery_mean():
    assert scenery_mean(SceneryModel.iid(mu=Profile.constant(3)), 5) == 3.0
    assert scenery_mean(SceneryModel.iid(), 0) == 0.0
    per = SceneryModel.iid(mu=Profile.periodic(1.0, 2))
    assert scenery_mean(per, 0) == 1.0
    assert scenery_mean(per, 1) == -1.0
    # non-centered innovation: mu + sigma * sum(a) * E eps
    m = SceneryModel.causal_ma(coeffs=[1.0, 0.5], innovation=Innovation("constant", 2.0),
                               sigma=Profile.constant(3.0))
    assert scenery_mean(m, 0) == pytest.approx(3.0 * 1.5 * 2.0)


def test_geometric_truncation():
    a = geometric_coeffs(0.5)
    K = len(a) - 1
    assert 0.5 ** (K + 1) / 0.5 <= 1e-12
    assert 0.5 ** K / 0.5 > 1e-12
    assert geometric_coeffs(0.0) == (1.0,)


def test_ma_variance_matches_closed_form():
    # Var xi_i = sigma_i^2 / (1 - rho^2) for geometric coefficients, unit innovations
    rho, R = 0.5, 10**5
    m = SceneryModel.causal_ma(rho=rho, sigma=Profile.periodic(0.5, 4, 1.0))
    seeds = derive_seeds(123, SAMPLE_DOMAIN, np.arange(R))
    x = site_values(m, [0, 1, 2], seeds)
    target = m.sigma(np.array([0, 1, 2])) ** 2 / (1 - rho**2)
    v = x.var(axis=0, ddof=1)
    # SE of a sample variance for Gaussian data: sqrt(2/(R-1)) * sigma^2
    se = np.sqrt(2 / (R - 1)) * target
    assert np.all(np.abs(v - target) <= 3 * se)


def test_invalid_models_rejected():
    with pytest.raises(ValueError):
        Innovation("pareto_centered", 1.0)
    with pytest.raises(ValueError):
        SceneryModel.heavy_tail(0.9)
    with pytest.raises(ValueError, match="bounded"):
        Profile(offset=math.inf)
    with pytest.raises(ValueError, match="bounded below"):
        SceneryModel.iid(sigma=Profile.periodic(1.0, 3, 0.5))
    with pytest.raises(ValueError):
        SceneryModel("iid", coeffs=(1.0, 0.5))


def test_window_coverage_error():
    s = gen_scenery(SceneryModel.iid(), (-3, 3), 0)
    with pytest.raises(WindowOverflowError):
        s.at([0, 4])


def test_pareto_tail_and_norms():
    inn = Innovation("pareto_centered", 1.5)
    assert inn.mean == 0.0
    # P(X - 3 >= x) = (x + 3)^-1.5 for x + 3 >= 1
    assert inn.sf(1024.0) == pytest.approx(1027.0**-1.5)
    assert Innovation("pareto", 1.5).mean == 3.0
    assert math.isinf(inn.variance)
    u = (np.arange(1, 200001) - 0.5) / 200000
    x = inn.from_uniform(u)
    assert np.mean(np.abs(x)) == pytest.approx(inn.norm(1), rel=0.02)
    assert Innovation("gaussian").norm(1) == pytest.approx(math.sqrt(2 / math.pi))


def test_ui_diagnostic():
    deg = SceneryModel.iid(Innovation("constant", 1.0))
    t = uniform_integrability_diagnostic(deg, (-2, 2), [2.0], 1000, seed=1)
    assert t.values[0] == 0.0
    g = uniform_integrability_diagnostic(SceneryModel.iid(), (0, 0), [0.0, 1.0, 2.0, 4.0], 20000, seed=2)
    assert abs(g.values[0] - 1.0) <= 3 * g.stderr[0]
    assert np.all(np.diff(g.values) <= 0)
    assert g.values[-1] < 0.01
    ma = uniform_integrability_diagnostic(MA, (-3, 3), [1.0, 2.0], 5000, seed=3)
    assert ma.values[0] >= ma.values[1]
    with pytest.raises(ValueError):
        uniform_integrability_diagnostic(MA, (0, 0), [1.0], 999, seed=3)
