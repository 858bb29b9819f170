"""Random-walk trajectories on the integer lattice.

Two families are supported: walks with i.i.d. zero-mean lattice increments,
and walks whose increments are fractional Gaussian noise (stationary, long
range dependent for H > 1/2).  Gaussian positions are mapped to lattice sites
with ``floor``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._rng import rng_for

EIG_TOL = 1e-8


class FgnEmbeddingError(ValueError):
    """Circulant embedding produced a materially negative eigenvalue."""


@dataclass(frozen=True)
class WalkModel:
    """Declarative walk description.

    ``kind`` is ``"iid"`` (lattice increments), ``"fgn"`` (fractional Gaussian
    increments with unit variance) or ``"drift"`` (every increment is +1; only
    meant for tests of the regression machinery).
    """

    kind: str = "iid"
    increment: str = "rademacher"  # rademacher | lazy | uniform
    p_stay: float = 0.0
    support: tuple[int, ...] = ()
    hurst: float = 0.5

    def __post_init__(self):
        if self.kind not in ("iid", "fgn", "drift"):
            raise ValueError(f"unknown walk kind {self.kind!r}")
        if self.kind == "fgn" and not 0.0 < self.hurst < 1.0:
            raise ValueError(f"hurst must lie in (0, 1), got {self.hurst}")
        if self.kind == "iid":
            if self.increment not in ("rademacher", "lazy", "uniform"):
                raise ValueError(f"unknown increment law {self.increment!r}")
            if self.increment == "lazy" and not 0.0 <= self.p_stay < 1.0:
                raise ValueError("p_stay must lie in [0, 1)")
            if self.increment == "uniform" and len(self.support) == 0:
                raise ValueError("uniform increments need a non-empty support")

    @classmethod
    def rademacher(cls) -> "WalkModel":
        return cls("iid", "rademacher")

    @classmethod
    def lazy(cls, p_stay: float) -> "WalkModel":
        return cls("iid", "lazy", p_stay=p_stay)

    @classmethod
    def uniform(cls, support) -> "WalkModel":
        return cls("iid", "uniform", support=tuple(int(s) for s in support))

    @classmethod
    def fgn(cls, hurst: float) -> "WalkModel":
        return cls("fgn", hurst=hurst)

    @classmethod
    def drift(cls) -> "WalkModel":
        return cls("drift")

    @property
    def mean(self) -> float:
        if self.kind == "drift":
            return 1.0
        if self.kind == "iid" and self.increment == "uniform":
            return float(np.mean(self.support))
        return 0.0

    @property
    def sigma2(self) -> float:
        """Variance of a single increment."""
        if self.kind == "fgn":
            return 1.0
        if self.kind == "drift":
            return 0.0
        if self.increment == "rademacher":
            return 1.0
        if self.increment == "lazy":
            return 1.0 - self.p_stay
        s = np.asarray(self.support, dtype=float)
        return float(np.mean((s - s.mean()) ** 2))

    @property
    def growth_exponent(self) -> float:
        """Exponent e with |S_n| of order n**e (1/2, H, or 1 for drift)."""
        if self.kind == "fgn":
            return self.hurst
        if self.kind == "drift":
            return 1.0
        return 0.5

    def var_sum(self, n: int) -> float:
        """Var(S_n); exact for both families (L == 1 for fGn)."""
        if self.kind == "fgn":
            return float(n) ** (2 * self.hurst)
        return self.sigma2 * n

    def increment_support(self) -> tuple[int, ...]:
        if self.kind == "drift":
            return (1,)
        if self.increment == "rademacher":
            return (-1, 1)
        if self.increment == "lazy":
            return (-1, 0, 1)
        return tuple(sorted(set(self.support)))


@dataclass(frozen=True)
class WalkPath:
    sites: np.ndarray
    raw: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.sites) - 1

    def max_abs(self, upto: int | None = None) -> int:
        s = self.sites if upto is None else self.sites[: upto + 1]
        return int(np.max(np.abs(s)))


def gen_iid_walk(model: WalkModel, n: int, seed: int) -> WalkPath:
    if n < 0:
        raise ValueError("n must be non-negative")
    if model.kind == "drift":
        return WalkPath(np.arange(n + 1, dtype=np.int64))
    if model.kind != "iid":
        raise ValueError("gen_iid_walk needs an iid lattice model")
    if model.mean != 0.0:
        raise ValueError(f"increment law has nonzero mean {model.mean}")
    rng = rng_for(seed)
    if model.increment == "rademacher":
        steps = 2 * rng.integers(0, 2, size=n, dtype=np.int64) - 1
    elif model.increment == "lazy":
        q = 0.5 * (1.0 - model.p_stay)
        steps = rng.choice(np.array([-1, 0, 1], dtype=np.int64), size=n, p=[q, model.p_stay, q])
    else:
        steps = rng.choice(np.asarray(model.support, dtype=np.int64), size=n)
    sites = np.empty(n + 1, dtype=np.int64)
    sites[0] = 0
    np.cumsum(steps, out=sites[1:])
    return WalkPath(sites)


def fgn_autocovariance(hurst, lag):
    """r(k) = (|k+1|^2H - 2|k|^2H + |k-1|^2H) / 2; scalar or array ``lag``."""
    if not 0.0 < hurst < 1.0:
        raise ValueError(f"hurst must lie in (0, 1), got {hurst}")
    k = np.abs(np.asarray(lag, dtype=float))
    h2 = 2.0 * hurst
    r = 0.5 * (np.abs(k + 1) ** h2 - 2 * k**h2 + np.abs(k - 1) ** h2)
    return float(r) if np.ndim(r) == 0 else r


def embedding_size(n: int) -> int:
    """Power-of-two ring length >= 2(n-1), at least 2."""
    need = max(2, 2 * (n - 1))
    return 1 << (need - 1).bit_length()


@lru_cache(maxsize=64)
def _circulant_eigs(hurst: float, n: int) -> tuple[np.ndarray, float]:
    m = embedding_size(n)
    half = m // 2
    r = fgn_autocovariance(hurst, np.arange(half + 1))
    c = np.concatenate([r, r[-2:0:-1]])
    eig = np.fft.fft(c).real
    low = float(eig.min())
    if low < -EIG_TOL:
        raise FgnEmbeddingError(
            f"circulant eigenvalue {low:.3e} < -{EIG_TOL:g} (H={hurst}, n={n}, ring={m})")
    eig = np.clip(eig, 0.0, None)
    eig.setflags(write=False)
    return eig, low


def circulant_eigenvalues(hurst: float, n: int) -> np.ndarray:
    """Clamped eigenvalues of the fGn circulant embedding for ``n`` increments.

    Raises FgnEmbeddingError if any eigenvalue is below -1e-8.
    """
    return _circulant_eigs(float(hurst), int(n))[0]


def min_circulant_eigenvalue(hurst: float, n: int) -> float:
    return _circulant_eigs(float(hurst), int(n))[1]


def fgn_increments(hurst: float, n: int, rng: np.random.Generator) -> np.ndarray:
    eig = circulant_eigenvalues(hurst, n)
    m = len(eig)
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    w = np.fft.fft(np.sqrt(eig / m) * z)
    return w.real[:n].copy()


def gen_fgn_walk(model: WalkModel, n: int, seed: int) -> WalkPath:
    if model.kind != "fgn":
        raise ValueError("gen_fgn_walk needs an fgn model")
    if n < 1:
        raise ValueError("fgn walks need n >= 1")
    x = fgn_increments(model.hurst, n, rng_for(seed))
    raw = np.empty(n + 1)
    raw[0] = 0.0
    np.cumsum(x, out=raw[1:])
    return WalkPath(np.floor(raw).astype(np.int64), raw)


def gen_walk(model: WalkModel, n: int, seed: int) -> WalkPath:
    if model.kind == "fgn":
        return gen_fgn_walk(model, n, seed)
    return gen_iid_walk(model, n, seed)


def lil_envelope(model: WalkModel, n: int) -> float:
    """sqrt(2 Var(S_n) log log n), with log log clipped at n = e^e (value 1)."""
    loglog = math.log(math.log(max(n, math.e**math.e)))
    return math.sqrt(2.0 * model.var_sum(n) * loglog)


def support_radius(model: WalkModel, n: int, delta: float) -> float:
    """n^(e + delta): beyond it local times should vanish for large n."""
    return float(n) ** (model.growth_exponent + delta)
