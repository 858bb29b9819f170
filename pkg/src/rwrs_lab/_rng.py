"""Deterministic seed derivation.

Every random quantity in the package is a pure function of an integer seed.
Two mechanisms are used:

* ``derive_seed(base, *keys)`` folds integer keys into a 64-bit seed with the
  splitmix64 finalizer.  Walks use the result to seed a ``PCG64`` generator.
* ``site_uniforms(seeds, sites)`` hashes ``(seed, site)`` pairs straight to
  uniforms in (0, 1).  Scenery innovations are keyed by lattice site this way,
  so a realization on a larger window agrees with a smaller one wherever they
  overlap.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# derivation domains; walk and scenery streams never share a key prefix
WALK_DOMAIN = 0x57414C4B          # "WALK"
SCENERY_DOMAIN = 0x5343454E       # "SCEN"
SAMPLE_DOMAIN = 0x53414D50        # "SAMP"


def mix64(x: int) -> int:
    """splitmix64 step on a Python int."""
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _mix64_array(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def derive_seed(base: int, *keys: int) -> int:
    h = mix64(int(base) & MASK64)
    for k in keys:
        h = mix64(h ^ (int(k) & MASK64))
    return h


def derive_seeds(base: int, domain: int, indices) -> np.ndarray:
    """Vectorised ``derive_seed(base, domain, i)`` over an index array."""
    head = derive_seed(base, domain)
    idx = np.asarray(indices, dtype=np.int64).astype(np.uint64)
    return _mix64_array(np.uint64(head) ^ idx)


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & MASK64))


def site_uniforms(seeds, sites) -> np.ndarray:
    """Uniforms in (0, 1) keyed by (seed, site); broadcasts seeds against sites.

    ``u = ((h >> 11) + 0.5) / 2**53`` with ``h = mix(mix(seed) ^ mix(site))``,
    so 0 and 1 are never produced.
    """
    s = np.asarray(seeds, dtype=np.uint64)
    i = np.asarray(sites, dtype=np.int64).astype(np.uint64)
    h = _mix64_array(_mix64_array(s) ^ _mix64_array(i))
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
