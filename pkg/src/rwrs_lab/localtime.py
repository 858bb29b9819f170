"""Occupation measures of lattice paths and the scenery sum Z_n."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .scenery import Scenery, WindowOverflowError
from .walk import WalkPath

# bincount over the visited range is used while the range is at most this
# multiple of the path length; otherwise counts go through np.unique
DENSE_RANGE_FACTOR = 4


@dataclass(frozen=True)
class LocalTimeProfile:
    """Local times N_n(i), stored sparsely as sorted visited sites and counts."""

    n: int
    sites: np.ndarray
    counts: np.ndarray

    def __getitem__(self, i: int) -> int:
        k = np.searchsorted(self.sites, i)
        if k < len(self.sites) and self.sites[k] == i:
            return int(self.counts[k])
        return 0

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.sites.tolist(), self.counts.tolist()))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def distinct(self) -> int:
        return len(self.sites)

    def dense(self) -> tuple[int, np.ndarray]:
        """(lowest visited site, counts over the full visited range)."""
        lo = int(self.sites[0])
        d = np.zeros(int(self.sites[-1]) - lo + 1, dtype=np.int64)
        d[self.sites - lo] = self.counts
        return lo, d


def _sites_of(path) -> np.ndarray:
    return np.asarray(path.sites if isinstance(path, WalkPath) else path, dtype=np.int64)


def local_time(path) -> LocalTimeProfile:
    s = _sites_of(path)
    if s.size == 0:
        raise ValueError("empty path")
    lo, hi = int(s.min()), int(s.max())
    if hi - lo < DENSE_RANGE_FACTOR * len(s):
        d = np.bincount(s - lo)
        nz = np.flatnonzero(d)
        return LocalTimeProfile(len(s) - 1, nz + lo, d[nz])
    u, c = np.unique(s, return_counts=True)
    return LocalTimeProfile(len(s) - 1, u, c)


def self_intersection(profile: LocalTimeProfile) -> int:
    """alpha(n, 0) = sum_i N_n(i)^2."""
    c = profile.counts.astype(np.int64)
    return int(c @ c)


def intersection(profile: LocalTimeProfile, i: int) -> int:
    """alpha(n, i) = sum_x N(x) N(x - i), the number of pairs (k, j) with S_k - S_j = i."""
    target = profile.sites - i
    idx = np.searchsorted(profile.sites, target)
    idx[idx == len(profile.sites)] = 0
    hit = profile.sites[idx] == target
    return int(profile.counts[hit] @ profile.counts[idx[hit]])


def intersection_all(profile: LocalTimeProfile) -> tuple[np.ndarray, np.ndarray]:
    """All alpha(n, i) for i in [-(range), range] via one correlation."""
    _, d = profile.dense()
    r = len(d) - 1
    ac = np.correlate(d, d, mode="full")
    return np.arange(-r, r + 1), ac


def z_prefixes(path, scenery: Scenery) -> np.ndarray:
    """Z_0, ..., Z_n in one pass."""
    return np.cumsum(scenery.at(_sites_of(path)))


def z_statistic(path, scenery: Scenery, exact: bool = False) -> float:
    """Z_n = sum_k xi_{S_k}.  ``exact`` returns the correctly rounded sum."""
    v = scenery.at(_sites_of(path))
    return math.fsum(v.tolist()) if exact else float(np.sum(v))


def z_from_profile(profile: LocalTimeProfile, scenery: Scenery, exact: bool = False) -> float:
    """Site-weighted form sum_i N_n(i) xi_i.

    With ``exact`` the products and the sum are formed in rational arithmetic,
    so the result is bit-identical to ``z_statistic(..., exact=True)``.
    """
    v = scenery.at(profile.sites)
    if not exact:
        return float(profile.counts @ v)
    return float(sum((Fraction(x) * c for x, c in zip(v.tolist(), profile.counts.tolist())), Fraction(0)))


__all__ = [
    "LocalTimeProfile", "WindowOverflowError", "intersection", "intersection_all", "local_time",
    "self_intersection", "z_from_profile", "z_prefixes", "z_statistic",
]
