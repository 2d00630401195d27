"""Weibull potentials and their extreme-value statistics."""

from dataclasses import dataclass
import math

import numpy as np

from .lattice import Box
from .parallel import chunk_sizes, pmap
from .seeding import derive_seed, rng, site_uniforms


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class WeibullParams:
    """Shape ``rho > 1`` of the law with survival function ``exp(-y^rho/rho)``."""

    rho: float

    def __post_init__(self):
        if not (self.rho > 1):
            raise ParameterError(f"rho must exceed 1, got {self.rho}")

    @property
    def rho_prime(self):
        return self.rho / (self.rho - 1.0)

    def survival(self, y):
        y = np.maximum(np.asarray(y, dtype=float), 0.0)
        return np.exp(-(y**self.rho) / self.rho)

    def from_exponential(self, e):
        """Inverse-CDF map ``v = (rho E)^{1/rho}`` for standard exponential ``E``."""
        return (self.rho * np.asarray(e, dtype=float)) ** (1.0 / self.rho)

    def from_uniform(self, u):
        return self.from_exponential(-np.log(u))


@dataclass(frozen=True)
class Potential:
    box: Box
    values: np.ndarray  # aligned with box.sites()
    seed: int
    rho: float

    @property
    def sites(self):
        return self.box.sites()

    def as_dict(self):
        return {tuple(int(c) for c in s): float(v) for s, v in zip(self.sites, self.values)}

    def __getitem__(self, site):
        return self.as_dict()[tuple(site) if not isinstance(site, int) else (site,)]


@dataclass(frozen=True)
class OrderStatistics:
    sorted_values: np.ndarray
    sites: np.ndarray


def sample_potential(box, params, seed):
    """I.i.d. Weibull values on ``box``; a site's value depends only on (seed, site)."""
    if not isinstance(params, WeibullParams):
        params = WeibullParams(float(params))
    if box.cardinality < 1:
        raise ParameterError("empty box")
    values = params.from_uniform(site_uniforms(seed, box.sites()))
    return Potential(box, values, int(seed), params.rho)


def order_statistics(p):
    """Descending values; ties keep lexicographic site order."""
    order = np.argsort(-np.asarray(p.values), kind="stable")
    return OrderStatistics(np.asarray(p.values)[order], p.sites[order])


def gumbel_normalizers(box_size, params):
    """``a = (rho log n)^{1/rho}``, ``b = (rho log n)^{-(1 - 1/rho)}`` for ``n = box_size``."""
    rho = params.rho if isinstance(params, WeibullParams) else float(params)
    if box_size < 2:
        raise ParameterError("box_size must be >= 2")
    z = rho * math.log(box_size)
    return z ** (1.0 / rho), z ** (-(1.0 - 1.0 / rho))


def gumbel_cdf(x):
    return np.exp(-np.exp(-np.asarray(x, dtype=float)))


def ks_distance(samples, cdf):
    """Two-sided Kolmogorov-Smirnov distance between ``samples`` and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    F = cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def _top_two(job):
    seed, tag, count, n_sites, rho = job
    g = rng(seed, tag)
    v = WeibullParams(rho).from_exponential(g.standard_exponential((count, n_sites)))
    part = np.partition(v, n_sites - 2, axis=1) if n_sites >= 2 else v
    return part[:, -1], part[:, -2] if n_sites >= 2 else np.zeros(count)


def _n_sites(box):
    return int(box) if isinstance(box, (int, np.integer)) else box.cardinality


def replica_maxima(params, box, n_replicas, seed, workers=1, chunk=1000):
    """Largest and second-largest value over ``n_replicas`` independent boxes.

    ``box`` is a :class:`Box` or a site count (only the count matters here).
    """
    jobs = [(seed, i, c, _n_sites(box), params.rho) for i, c in enumerate(chunk_sizes(n_replicas, chunk))]
    res = pmap(_top_two, jobs, workers)
    return np.concatenate([r[0] for r in res]), np.concatenate([r[1] for r in res])


def extreme_value_diagnostics(params, box, n_replicas, seed, c_factors=(1.0, 1.2), workers=1):
    """Gumbel KS distance plus exceedance frequencies of v_(1), v_(2).

    Returns a dict with ``ks`` and, per factor ``c`` in ``c_factors``, the
    empirical ``P(v_(1) >= c a)`` and ``P(v_(2) >= c a)`` next to the bounds
    ``n e^{-c_l^rho/rho}`` and ``n^4 e^{-2 c_l^rho/rho}``.
    """
    if n_replicas < 1000:
        raise ParameterError("need at least 1000 replicas")
    n = _n_sites(box)
    a, b = gumbel_normalizers(n, params)
    v1, v2 = replica_maxima(params, box, n_replicas, derive_seed(seed, n), workers)
    report = {"box_size": n, "a": a, "b": b, "ks": ks_distance((v1 - a) / b, gumbel_cdf), "exceed": []}
    rho = params.rho
    for c in c_factors:
        cl = c * a
        report["exceed"].append(
            {
                "c_factor": c,
                "c": cl,
                "freq_v1": float(np.mean(v1 >= cl)),
                "bound_v1": n * math.exp(-(cl**rho) / rho),
                "freq_v2": float(np.mean(v2 >= cl)),
                "bound_v2": n**4 * math.exp(-2 * cl**rho / rho),
            }
        )
    return report
