"""Deterministic seed derivation.

Two mechanisms are used. Per-site potential values come from a counter hash
(splitmix64) of ``(seed, site coordinates)`` so that a site's value does not
depend on which box it was generated in or on generation order. Bulk streams
(replica chunks, walk samples) use numpy ``SeedSequence`` keyed by integer
tags.
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def splitmix64(x):
    """Vectorized splitmix64 finalizer on uint64 arrays (wrapping arithmetic)."""
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def _as_u64(value):
    return np.uint64(int(value) & _MASK64)


def derive_seed(seed, *tags):
    """Mix integer tags into ``seed``; returns a python int in [0, 2**63)."""
    h = splitmix64(_as_u64(seed))
    for tag in tags:
        h = splitmix64(h ^ _as_u64(tag))
    return int(h) >> 1


def site_uniforms(seed, sites):
    """Uniform(0, 1) variates, one per row of ``sites`` (integer coordinates).

    The value attached to a site is a pure function of ``(seed, site)``.
    """
    sites = np.atleast_2d(np.asarray(sites, dtype=np.int64))
    h = np.full(sites.shape[0], splitmix64(_as_u64(seed)), dtype=np.uint64)
    for k in range(sites.shape[1]):
        h = splitmix64(h ^ sites[:, k].astype(np.uint64))
    # 53 high bits, shifted off zero so that -log(u) is finite
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


def rng(seed, *tags):
    """A PCG64 generator keyed by ``(seed, *tags)``; tags must be >= 0."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed) & _MASK64, *map(int, tags)])))
