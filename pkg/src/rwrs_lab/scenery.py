"""Random sceneries over a finite window of lattice sites.

All models share one representation

    xi_i = mu_i + sigma_i * sum_{k=0..K} a_k * eps_{i-k}

with deterministic bounded profiles ``mu``/``sigma`` and i.i.d. innovations
``eps`` keyed by (seed, site).  The i.i.d. scenery is the case a = (1,).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from ._rng import SAMPLE_DOMAIN, derive_seeds, site_uniforms

MA_TAIL_TOL = 1e-12

INNOVATIONS = ("gaussian", "rademacher", "centered_exp", "pareto_centered", "pareto", "constant")


class WindowOverflowError(IndexError):
    """A walk visited a site outside the realized scenery window."""


@dataclass(frozen=True)
class Innovation:
    """Innovation law. ``param`` is the tail index for the Pareto laws
    (scale 1) and the value for ``constant``."""

    kind: str = "gaussian"
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in INNOVATIONS:
            raise ValueError(f"unknown innovation {self.kind!r}")
        if self.kind.startswith("pareto") and not self.param > 1.0:
            raise ValueError(f"Pareto tail index must exceed 1 (finite mean), got {self.param}")

    @property
    def mean(self) -> float:
        if self.kind == "pareto":
            return self.param / (self.param - 1.0)
        if self.kind == "constant":
            return self.param
        return 0.0

    @property
    def variance(self) -> float:
        if self.kind in ("gaussian", "rademacher", "centered_exp"):
            return 1.0
        if self.kind == "constant":
            return 0.0
        b = self.param
        return math.inf if b <= 2 else b / ((b - 1) ** 2 * (b - 2))

    def norm(self, q: int) -> float:
        """||eps||_q for q in {1, 2}."""
        if q == 2:
            return math.sqrt(self.variance + self.mean**2)
        if q != 1:
            raise ValueError("only q = 1, 2 are supported")
        if self.kind == "gaussian":
            return math.sqrt(2.0 / math.pi)
        if self.kind == "rademacher":
            return 1.0
        if self.kind == "centered_exp":
            return 2.0 / math.e
        if self.kind == "constant":
            return abs(self.param)
        b = self.param
        m = b / (b - 1.0)
        if self.kind == "pareto":
            return m
        # E|X - m| = 2 E(X - m)^+ = 2 m^(1-b) / (b-1)
        return 2.0 * m ** (1.0 - b) / (b - 1.0)

    def from_uniform(self, u: np.ndarray) -> np.ndarray:
        if self.kind == "gaussian":
            return ndtri(u)
        if self.kind == "rademacher":
            return np.where(u < 0.5, -1.0, 1.0)
        if self.kind == "centered_exp":
            return -np.log(u) - 1.0
        if self.kind == "constant":
            return np.full(np.shape(u), self.param)
        x = u ** (-1.0 / self.param)
        return x - self.param / (self.param - 1.0) if self.kind == "pareto_centered" else x

    def sf(self, x: float) -> float:
        """P(eps >= x), Pareto laws only."""
        if not self.kind.startswith("pareto"):
            raise ValueError("closed-form tail only for Pareto innovations")
        if self.kind == "pareto_centered":
            x = x + self.param / (self.param - 1.0)
        return 1.0 if x <= 1.0 else x ** (-self.param)


@dataclass(frozen=True)
class Profile:
    """Bounded deterministic site profile ``offset + amplitude*cos(2 pi i / period)``."""

    offset: float = 0.0
    amplitude: float = 0.0
    period: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.offset) and math.isfinite(self.amplitude)):
            raise ValueError("profiles must be bounded (finite offset and amplitude)")
        if int(self.period) < 1:
            raise ValueError("period must be a positive integer")

    @classmethod
    def zero(cls) -> "Profile":
        return cls()

    @classmethod
    def constant(cls, c: float) -> "Profile":
        return cls(offset=float(c))

    @classmethod
    def periodic(cls, amplitude: float, period: int, offset: float = 0.0) -> "Profile":
        return cls(offset=float(offset), amplitude=float(amplitude), period=int(period))

    @property
    def is_constant(self) -> bool:
        return self.amplitude == 0.0 or self.period == 1

    @property
    def sup_abs(self) -> float:
        return abs(self.offset) + abs(self.amplitude)

    @property
    def inf(self) -> float:
        return self.offset - abs(self.amplitude)

    def __call__(self, sites) -> np.ndarray:
        i = np.asarray(sites)
        if self.amplitude == 0.0:
            return np.full(i.shape, self.offset, dtype=float)
        return self.offset + self.amplitude * np.cos(2.0 * np.pi * (i % self.period) / self.period)


def geometric_coeffs(rho: float, tail_tol: float = MA_TAIL_TOL) -> tuple[float, ...]:
    """a_k = rho**k for k <= K, with K the first lag whose tail sum is <= tail_tol."""
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    if rho == 0.0:
        return (1.0,)
    # sum_{k>K} rho^k = rho^(K+1) / (1 - rho)
    K = max(0, math.ceil(math.log(tail_tol * (1 - rho)) / math.log(rho)) - 1)
    return tuple(rho**k for k in range(K + 1))


@dataclass(frozen=True)
class SceneryModel:
    kind: str = "iid"  # iid | causal_ma | heavy_tail
    innovation: Innovation = field(default_factory=Innovation)
    coeffs: tuple[float, ...] = (1.0,)
    mu: Profile = field(default_factory=Profile)
    sigma: Profile = field(default_factory=lambda: Profile(offset=1.0))
    rho: float | None = None  # kept for provenance when coeffs are geometric

    def __post_init__(self):
        if self.kind not in ("iid", "causal_ma", "heavy_tail"):
            raise ValueError(f"unknown scenery kind {self.kind!r}")
        a = np.asarray(self.coeffs, dtype=float)
        if a.ndim != 1 or len(a) == 0 or not np.all(np.isfinite(a)):
            raise ValueError("MA coefficients must be a finite non-empty list")
        if self.kind == "iid" and tuple(self.coeffs) != (1.0,):
            raise ValueError("iid sceneries have coefficients (1,)")
        if self.sigma.inf <= 0.0:
            raise ValueError("sigma profile must be bounded below by a positive constant")
        if self.kind == "heavy_tail":
            if not self.innovation.kind.startswith("pareto"):
                raise ValueError("heavy_tail sceneries use Pareto innovations")
            if not (self.mu.is_constant and self.sigma.is_constant):
                raise ValueError("heavy_tail sceneries are identically distributed (constant profiles)")

    @classmethod
    def iid(cls, innovation: Innovation | None = None, mu: Profile | None = None,
            sigma: Profile | None = None) -> "SceneryModel":
        return cls("iid", innovation or Innovation(), (1.0,), mu or Profile(), sigma or Profile(1.0))

    @classmethod
    def causal_ma(cls, rho: float | None = None, coeffs=None, innovation: Innovation | None = None,
                  mu: Profile | None = None, sigma: Profile | None = None) -> "SceneryModel":
        if (rho is None) == (coeffs is None):
            raise ValueError("give exactly one of rho or coeffs")
        a = geometric_coeffs(rho) if rho is not None else tuple(float(c) for c in coeffs)
        return cls("causal_ma", innovation or Innovation(), a, mu or Profile(), sigma or Profile(1.0), rho)

    @classmethod
    def heavy_tail(cls, index: float = 1.5, centered: bool = True, coeffs=(1.0,),
                   scale: float = 1.0, shift: float = 0.0) -> "SceneryModel":
        inn = Innovation("pareto_centered" if centered else "pareto", index)
        return cls("heavy_tail", inn, tuple(float(c) for c in coeffs),
                   Profile.constant(shift), Profile.constant(scale))

    @property
    def K(self) -> int:
        return len(self.coeffs) - 1

    @property
    def coeff_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    @property
    def sigma_max(self) -> float:
        return self.sigma.sup_abs

    def mean(self, sites) -> np.ndarray:
        return self.mu(sites) + self.sigma(sites) * self.coeff_array.sum() * self.innovation.mean

    def variance(self, sites) -> np.ndarray:
        a = self.coeff_array
        return self.sigma(sites) ** 2 * float(a @ a) * self.innovation.variance

    def covariance(self, i, j) -> np.ndarray:
        """Exact Cov(xi_i, xi_j) (finite-variance innovations)."""
        i, j = np.broadcast_arrays(np.asarray(i), np.asarray(j))
        lag = np.abs(j - i)
        a = self.coeff_array
        acf = np.array([float(a[: len(a) - L] @ a[L:]) if L < len(a) else 0.0
                        for L in lag.ravel()]).reshape(lag.shape)
        return self.sigma(i) * self.sigma(j) * acf * self.innovation.variance

    @property
    def sup_variance(self) -> float:
        a = self.coeff_array
        return self.sigma_max**2 * float(a @ a) * self.innovation.variance


@dataclass(frozen=True)
class Scenery:
    lo: int
    hi: int
    values: np.ndarray = field(repr=False)
    model: SceneryModel

    @property
    def window(self) -> tuple[int, int]:
        return self.lo, self.hi

    def covers(self, lo: int, hi: int) -> bool:
        return self.lo <= lo and hi <= self.hi

    def at(self, sites) -> np.ndarray:
        s = np.asarray(sites)
        if s.size and (s.min() < self.lo or s.max() > self.hi):
            raise WindowOverflowError(
                f"sites [{int(s.min())}, {int(s.max())}] exceed scenery window [{self.lo}, {self.hi}]")
        return self.values[s - self.lo]

    def means(self) -> np.ndarray:
        return self.model.mean(np.arange(self.lo, self.hi + 1))


def site_values(model: SceneryModel, sites, seeds) -> np.ndarray:
    """Scenery values for every (seed, site) pair; shape (len(seeds), len(sites)).

    Each seed is an independent realization; within a seed the values agree
    with ``gen_scenery`` on any window containing the sites.
    """
    sites = np.atleast_1d(np.asarray(sites, dtype=np.int64))
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.uint64))
    K = model.K
    lo = int(sites.min()) - K
    src = np.arange(lo, int(sites.max()) + 1)
    eps = model.innovation.from_uniform(site_uniforms(seeds[:, None], src[None, :]))
    a = model.coeff_array
    ma = np.zeros((len(seeds), len(sites)))
    for k in range(K + 1):
        ma += a[k] * eps[:, sites - k - lo]
    return model.mu(sites) + model.sigma(sites) * ma


def gen_scenery(model: SceneryModel, window: tuple[int, int], seed: int) -> Scenery:
    lo, hi = int(window[0]), int(window[1])
    if hi < lo:
        raise ValueError(f"empty window [{lo}, {hi}]")
    K = model.K
    eps = model.innovation.from_uniform(site_uniforms(np.uint64(seed), np.arange(lo - K, hi + 1)))
    a = model.coeff_array
    width = hi - lo + 1
    ma = np.zeros(width)
    for k in range(K + 1):
        ma += a[k] * eps[K - k: K - k + width]
    sites = np.arange(lo, hi + 1)
    return Scenery(lo, hi, model.mu(sites) + model.sigma(sites) * ma, model)


def scenery_mean(model: SceneryModel, i):
    m = model.mean(i)
    return float(m) if np.ndim(m) == 0 else m


@dataclass
class UITable:
    thresholds: np.ndarray
    values: np.ndarray
    stderr: np.ndarray

    def rows(self):
        return list(zip(self.thresholds.tolist(), self.values.tolist(), self.stderr.tolist()))


def uniform_integrability_diagnostic(model: SceneryModel, window: tuple[int, int], threshold_grid,
                                     samples: int, seed: int) -> UITable:
    """Worst-site Monte Carlo estimate of E[xi_i^2 1{|xi_i| > M}] for each M."""
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    sites = np.arange(window[0], window[1] + 1)
    seeds = derive_seeds(seed, SAMPLE_DOMAIN, np.arange(samples))
    x = site_values(model, sites, seeds)
    x2 = x**2
    ax = np.abs(x)
    thr = np.asarray(threshold_grid, dtype=float)
    vals = np.empty(len(thr))
    ses = np.empty(len(thr))
    for t, M in enumerate(thr):
        y = np.where(ax > M, x2, 0.0)
        per_site = y.mean(axis=0)
        w = int(np.argmax(per_site))
        vals[t] = per_site[w]
        ses[t] = y[:, w].std(ddof=1) / math.sqrt(samples)
    return UITable(thr, vals, ses)
