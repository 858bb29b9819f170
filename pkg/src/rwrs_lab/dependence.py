"""Theta-dependence upper bounds for the shipped scenery models.

For a causal moving average xi_i = mu_i + sigma_i sum_k a_k eps_{i-k}, the
past sigma-field at i determines every term with k >= j in xi_{i+j}, giving

    theta_{1,q}(j) <= (sup_i sigma_i) * ||eps||_q * sum_{k >= j} |a_k|

with q = 2 for theta_{1,2} and q = 1 for theta_{1,1}.  The i.i.d. scenery is
the MA(0) case, whose bound vanishes for j >= 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import SAMPLE_DOMAIN, derive_seeds
from .scenery import SceneryModel, site_values

ORDERS = {"theta12": 2, "theta11": 1}


def _tail_sums(a: np.ndarray) -> np.ndarray:
    """t[j] = sum_{k >= j} |a_k| for j = 0..K, exact reverse accumulation."""
    return np.cumsum(np.abs(a)[::-1])[::-1]


def _q(order: str) -> int:
    try:
        return ORDERS[order.lower()]
    except KeyError:
        raise ValueError(f"order must be one of {sorted(ORDERS)}, got {order!r}") from None


def _bound(model: SceneryModel, q: int, j: int) -> float:
    if j < 0:
        raise ValueError("lag must be non-negative")
    norm = model.innovation.norm(q)
    tail = _tail_sums(model.coeff_array)
    t = float(tail[j]) if j < len(tail) else 0.0
    if t == 0.0:
        return 0.0
    return model.sigma_max * norm * t


def theta_bound_ma(model: SceneryModel, order: str, j: int) -> float:
    if model.kind != "causal_ma":
        raise ValueError(f"theta_bound_ma needs a causal_ma model, got {model.kind!r}")
    return _bound(model, _q(order), j)


@dataclass(frozen=True)
class ThetaBound:
    model: SceneryModel
    order: str
    q: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "q", _q(self.order))

    def bound_at(self, j: int) -> float:
        return _bound(self.model, self.q, j)

    @property
    def support(self) -> int:
        """Last lag with a nonzero bound (K for an MA(K) model)."""
        return self.model.K

    @property
    def summable(self) -> bool:
        # finite MA lists always have finitely many nonzero terms
        return math.isfinite(self.bound_at(0))

    def closed_form_sum(self) -> float:
        """sum_{j>=0} bound_at(j) = sup sigma * ||eps||_q * sum_k (k+1)|a_k|."""
        a = np.abs(self.model.coeff_array)
        return self.model.sigma_max * self.model.innovation.norm(self.q) * float(
            (np.arange(1, len(a) + 1) * a).sum())


def theta_bound(model: SceneryModel, order: str = "theta12") -> ThetaBound:
    """ThetaBound for any shipped model (iid sceneries are MA(0))."""
    return ThetaBound(model, order)


def summability_check(bound, tolerance: float = 1e-12, lag_cap: int = 1_000_000):
    """Partial sums of bound_at(j), j = 0, 1, ... until an increment drops below
    ``tolerance``.  Returns (partial_sums, converged); converged is False when
    the lag cap is reached first, and no limit is extrapolated.
    """
    f = bound.bound_at if hasattr(bound, "bound_at") else bound
    sums = []
    total = 0.0
    for j in range(lag_cap + 1):
        b = f(j)
        if not math.isfinite(b):
            return np.array(sums + [math.inf]), False
        total += b
        sums.append(total)
        if j > 0 and b < tolerance:
            return np.array(sums), True
    return np.array(sums), False


@dataclass
class CovRow:
    lag: int
    empirical: float   # max over probe sites of |Cov(xi_i, xi_{i+lag})|
    stderr: float      # SE at the site attaining the max
    bound: float       # sqrt(Var xi_i) * theta_{1,2}(lag) at that site
    exact: float       # analytic |Cov| (nan for transformed variables)
    ok: bool           # empirical <= bound + slack*SE at every probe site


def covariance_bound_check(model: SceneryModel, lags, samples: int, seed: int, probes=None,
                           transform: str | None = None, slack: float = 3.0) -> list[CovRow]:
    """Monte Carlo check of |Cov(xi_i, xi_{i+j})| <= sqrt(Var xi_i) * theta_{1,2}(j).

    ``transform`` in {None, "plus", "minus"} replaces xi by the positive or
    negative part of xi - E xi.  Both maps are 1-Lipschitz, so the same bound
    applies (their variance is at most Var xi).
    """
    if samples < 10_000:
        raise ValueError("need at least 10^4 samples")
    lags = [int(j) for j in lags]
    if probes is None:
        period = max(model.mu.period, model.sigma.period)
        probes = np.unique(np.arange(3) * period // 3)
    probes = np.asarray(probes, dtype=np.int64)
    sites = np.unique(np.concatenate([probes] + [probes + j for j in lags]))
    seeds = derive_seeds(seed, SAMPLE_DOMAIN, np.arange(samples))
    x = site_values(model, sites, seeds)
    x = x - model.mean(sites)
    if transform == "plus":
        x = np.maximum(x, 0.0)
    elif transform == "minus":
        x = np.maximum(-x, 0.0)
    elif transform is not None:
        raise ValueError(f"unknown transform {transform!r}")
    xc = x - x.mean(axis=0)
    col = {int(s): k for k, s in enumerate(sites)}
    sd = np.sqrt(model.variance(probes))
    theta = ThetaBound(model, "theta12")
    rows = []
    for j in lags:
        th = theta.bound_at(j)
        emp = np.empty(len(probes))
        se = np.empty(len(probes))
        for p, i in enumerate(probes):
            prod = xc[:, col[int(i)]] * xc[:, col[int(i) + j]]
            emp[p] = abs(prod.mean())
            se[p] = prod.std(ddof=1) / math.sqrt(samples)
        bnd = sd * th
        w = int(np.argmax(emp))
        exact = float(abs(model.covariance(probes[w], probes[w] + j))) if transform is None else math.nan
        rows.append(CovRow(j, float(emp[w]), float(se[w]), float(bnd[w]), exact,
                           bool(np.all(emp <= bnd + slack * se))))
    return rows
