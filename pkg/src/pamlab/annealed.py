"""Annealed first moment: cumulant function, Feynman-Kac sampler and path series.

All first-moment quantities are returned as logarithms unless stated
otherwise, since ``exp(t^rho'/rho')`` leaves double range quickly.
"""

from dataclasses import dataclass
from functools import lru_cache
import itertools
import math

import numpy as np
from scipy import integrate
from scipy.special import gammaln, log_ndtr, logsumexp

from . import kernels
from .lattice import enumerate_paths_from, visit_profile
from .parallel import chunk_sizes, pmap
from .seeding import rng

_QUAD = dict(epsabs=0.0, epsrel=1e-13, limit=500)


# ---------------------------------------------------------------------------
# cumulant generating function
# ---------------------------------------------------------------------------


def cumulant_H(t, rho):
    """``H(t) = log E exp(t v)`` for the Weibull law with survival ``exp(-y^rho/rho)``.

    For ``t < 1`` the moment integral ``int u^{rho-1} e^{-u^rho/rho + ut} du``
    is integrated directly. For ``t >= 1`` the substitution
    ``u = w t^{1/(rho-1)}`` turns it into ``t^rho' int w^{rho-1}
    e^{-t^rho'(w^rho/rho - w)} dw``, whose integrand peaks at ``w = 1``; the
    exponent is shifted by its minimum ``-1/rho'`` before integrating.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return 0.0
    if t < 1:
        f = lambda u: u ** (rho - 1) * math.exp(-(u**rho) / rho + u * t)  # noqa: E731
        return math.log(integrate.quad(f, 0.0, np.inf, **_QUAD)[0])
    rp = rho / (rho - 1)
    T = t**rp
    g = lambda w: w ** (rho - 1) * math.exp(-T * (w**rho / rho - w + 1 / rp))  # noqa: E731
    width = 1.0 / math.sqrt((rho - 1) * T)
    left = max(0.0, 1.0 - 40 * width)
    right = 1.0 + 40 * width
    pieces = [(0.0, left), (left, 1.0), (1.0, right), (right, np.inf)]
    total = sum(integrate.quad(g, a, b, **_QUAD)[0] for a, b in pieces if b > a)
    return rp * math.log(t) + T / rp + math.log(total)


def cumulant_H_rho2(t):
    """Closed form at ``rho = 2``: ``E e^{tv} = 1 + t sqrt(2 pi) e^{t^2/2} Phi(t)``."""
    if t == 0:
        return 0.0
    return float(np.logaddexp(0.0, math.log(t) + 0.5 * math.log(2 * math.pi) + t * t / 2 + log_ndtr(t)))


def cumulant_asymptote(t, rho, constant="pi"):
    """``t^rho'/rho' + (rho'/2) log t + c``.

    ``constant="pi"`` uses ``c = log(pi/(rho-1))/2``; ``"two_pi"`` uses
    ``log(2 pi/(rho-1))/2``, the value produced by the Laplace method with the
    curvature ``f''(1) = rho - 1`` of ``f(w) = w^rho/rho - w``.
    """
    rp = rho / (rho - 1)
    if constant not in ("pi", "two_pi"):
        raise ValueError(f"unknown constant {constant!r}")
    num = math.pi if constant == "pi" else 2 * math.pi
    return t**rp / rp + rp / 2 * math.log(t) + 0.5 * math.log(num / (rho - 1))


def weibull_moment(j, rho):
    """``E v^j = rho^{j/rho} Gamma(1 + j/rho)``."""
    return math.exp(j / rho * math.log(rho) + math.lgamma(1 + j / rho))


@lru_cache(maxsize=32)
def _H_table(t_max, rho, n_grid):
    grid = np.linspace(0.0, t_max, n_grid + 1)
    if rho == 2.0:
        vals = np.array([cumulant_H_rho2(x) for x in grid])
    else:
        vals = np.array([cumulant_H(x, rho) for x in grid])
    return grid, vals


# ---------------------------------------------------------------------------
# Feynman-Kac Monte Carlo
# ---------------------------------------------------------------------------


@dataclass
class AnnealedEstimate:
    log_mean: float
    stderr: float  # jackknife, on the log scale
    n_paths: int


def _walk_chunk(job):
    seed, tag, count, t, d, kappa, table, step, zero_H = job
    g = rng(seed, 31, tag)
    rate = 2 * d * kappa
    # enough holding intervals that exceeding them is astronomically unlikely
    K = int(rate * t + 12 * math.sqrt(rate * t + 1) + 20)
    hold = g.standard_exponential((count, K)) / rate
    while np.any(hold.sum(axis=1) < t):
        extra = g.standard_exponential((count, K)) / rate
        hold = np.concatenate([hold, extra], axis=1)
        K = hold.shape[1]
    direction = g.integers(0, 2 * d, size=(count, K - 1))
    base = 2 * K + 1
    mags = base ** (direction // 2)
    steps = np.where(direction % 2 == 0, mags, -mags).astype(np.int64)
    if zero_H:
        return np.zeros(count)
    return kernels.walk_log_weights(hold, steps, float(t), table, step)


def annealed_mean_mc(t, rho, kappa=1.0, d=1, n_paths=100_000, seed=0, workers=1, n_grid=4096, zero_H=False,
                     chunk=20_000):
    """``log E_0 exp(sum_x H(local time at x))`` over continuous-time walks of total jump rate ``2 d kappa``.

    Local times come exactly from the exponential holding times; ``H`` is
    tabulated on ``n_grid + 1`` points of ``[0, t]`` and linearly
    interpolated. ``zero_H=True`` replaces ``H`` by 0 (the estimate is then
    exactly 0 on the log scale).
    """
    grid, vals = _H_table(float(t), float(rho), int(n_grid))
    step = grid[1] - grid[0] if t > 0 else 1.0
    jobs = [(seed, i, c, t, d, kappa, vals, step, zero_H) for i, c in enumerate(chunk_sizes(n_paths, chunk))]
    logw = np.concatenate(pmap(_walk_chunk, jobs, workers))
    n = logw.size
    total = logsumexp(logw)
    est = total - math.log(n)
    # leave-one-out estimates of log mean
    top = float(np.max(logw))
    w = np.exp(logw - top)
    s = float(np.sum(w))
    loo = top + np.log(np.maximum(s - w, 1e-300)) - math.log(n - 1)
    se = math.sqrt((n - 1) / n * float(np.sum((loo - loo.mean()) ** 2)))
    return AnnealedEstimate(float(est), se, n)


def taylor_coefficients(rho, kappa=1.0, d=1, order=10):
    """``c_k = E[((kappa Laplacian + V)^k 1)(0)]`` for ``k = 0..order``.

    Each power is expanded into words of ``stay`` (weight ``v(x) - 2 d kappa``)
    and nearest-neighbour ``jump`` (weight ``kappa``) moves; the expectation of
    a word factorises over the sites visited, with
    ``E (v - 2dk)^m = sum_j C(m, j) E v^j (-2dk)^{m-j}``.
    """
    a = 2 * d * kappa
    shifted = [sum(math.comb(m, j) * weibull_moment(j, rho) * (-a) ** (m - j) for j in range(m + 1))
               for m in range(order + 1)]
    moves = [None] + [tuple(e) for e in _unit_steps(d)]
    coeffs = [1.0]
    for k in range(1, order + 1):
        total = 0.0
        for word in itertools.product(moves, repeat=k):
            pos = (0,) * d
            stays = {}
            jumps = 0
            for mv in word:
                if mv is None:
                    stays[pos] = stays.get(pos, 0) + 1
                else:
                    pos = tuple(p + q for p, q in zip(pos, mv))
                    jumps += 1
            total += kappa**jumps * math.prod(shifted[m] for m in stays.values())
        coeffs.append(total)
    return coeffs


def _unit_steps(d):
    from .lattice import unit_steps

    return unit_steps(d)


def taylor_mean(t, rho, kappa=1.0, d=1, order=10):
    """``sum_{k<=order} c_k t^k / k!`` (linear scale)."""
    c = taylor_coefficients(rho, kappa, d, order)
    return sum(ck * t**k / math.factorial(k) for k, ck in enumerate(c))


# ---------------------------------------------------------------------------
# asymptotic formula and path series
# ---------------------------------------------------------------------------


def annealed_asymptotic_formula(t, rho, kappa=1.0, d=1, variant="unit"):
    """Log of ``sqrt(pi/(rho-1)) t^{1-rho'/2} exp(t^rho'/rho' - 2d(kappa t - t^{2-rho'}))``.

    ``variant="kappa2"`` replaces ``t^{2-rho'}`` inside the bracket by
    ``kappa t^{2-rho'}`` so the correction reads ``2 d kappa^2 t^{2-rho'}``.
    """
    rp = rho / (rho - 1)
    if variant not in ("unit", "kappa2"):
        raise ValueError(f"unknown variant {variant!r}")
    corr = t ** (2 - rp) if variant == "unit" else kappa**2 * t ** (2 - rp)
    return 0.5 * math.log(math.pi / (rho - 1)) + (1 - rp / 2) * math.log(t) + t**rp / rp - 2 * d * (kappa * t - corr)


def _series_term(profile_mults, n, t, rp, kappa):
    s = sum(math.exp(rp * (m - 0.5) * math.log(t) - math.lgamma(m)) for m in profile_mults)
    return kappa ** (n - 1) * t ** (-(rp - 1) * n) * s


def annealed_series(t, rho, kappa=1.0, d=1, n_max=9):
    """Per-length terms of ``sum_n kappa^{n-1} t^{-(rho'-1) n} sum_{|gamma|=n} sum_i t^{rho'(n_i - 1/2)}/(n_i-1)!``.

    Returns ``(log_prefactor, terms)``; the series value is ``sum(terms)`` and
    the approximation of the annealed mean is ``log_prefactor + log(sum(terms))``
    with ``log_prefactor = log(pi/(rho-1))/2 + t^rho'/rho' - 2 d kappa t``.
    """
    rp = rho / (rho - 1)
    terms = []
    for n in range(1, n_max + 1):
        total = 0.0
        for path in enumerate_paths_from((0,) * d, n):
            total += _series_term(visit_profile(path).multiplicities, n, t, rp, kappa)
        terms.append(total)
    log_pref = 0.5 * math.log(math.pi / (rho - 1)) + t**rp / rp - 2 * d * kappa * t
    return log_pref, terms


def _is_dominant_loop(path):
    """Paths that sit at the origin at every odd position (origin visited more than half the time)."""
    prof = visit_profile(path)
    return prof.multiplicities[0] > len(path) / 2


def s1_path_sum(t, rho, kappa=1.0, d=1, m_max=4):
    """``S_1`` summed over enumerated dominant loops of ``2m+1`` sites, ``m <= m_max``; per-``m`` terms."""
    rp = rho / (rho - 1)
    out = []
    for m in range(m_max + 1):
        n = 2 * m + 1
        tot = 0.0
        for path in enumerate_paths_from((0,) * d, n):
            if _is_dominant_loop(path):
                n1 = visit_profile(path).multiplicities[0]
                tot += kappa ** (n - 1) * t ** (-(rp - 1) * n) * t ** (rp * (n1 - 0.5)) / math.factorial(n1 - 1)
        out.append(tot)
    return out


def s1_closed_form_terms(t, rho, kappa=1.0, d=1, m_max=4):
    """``t^{1-rho'/2} (2 d kappa^2 t^{2-rho'})^m / m!`` for ``m = 0..m_max``."""
    rp = rho / (rho - 1)
    x = 2 * d * kappa**2 * t ** (2 - rp)
    return [t ** (1 - rp / 2) * x**m / math.factorial(m) for m in range(m_max + 1)]


def s1_closed_form(t, rho, kappa=1.0, d=1):
    rp = rho / (rho - 1)
    return t ** (1 - rp / 2) * math.exp(2 * d * kappa**2 * t ** (2 - rp))


def s2_closed_form(t, rho, d=1):
    """``t^{1-rho'/2} 2d / (t^{2(rho'-1)} - 2d)``; requires ``t^{2(rho'-1)} > 2d``."""
    rp = rho / (rho - 1)
    q = t ** (2 * (rp - 1))
    if q <= 2 * d:
        raise ValueError("geometric series diverges")
    return t ** (1 - rp / 2) * 2 * d / (q - 2 * d)


def s2_geometric_terms(t, rho, d=1, m_max=60):
    """Terms ``t^{1-rho'/2} (2d/t^{2(rho'-1)})^m``, ``m = 1..m_max``."""
    rp = rho / (rho - 1)
    r = 2 * d / t ** (2 * (rp - 1))
    return [t ** (1 - rp / 2) * r**m for m in range(1, m_max + 1)]


def s2_path_sum(t, rho, kappa=1.0, d=1, m_max=4):
    """``S_2`` summed literally over dominant loops: non-origin sites, with their actual visit counts."""
    rp = rho / (rho - 1)
    out = []
    for m in range(1, m_max + 1):
        n = 2 * m + 1
        tot = 0.0
        for path in enumerate_paths_from((0,) * d, n):
            if _is_dominant_loop(path):
                mults = visit_profile(path).multiplicities[1:]
                tot += _series_term(mults, n, t, rp, kappa)
        out.append(tot)
    return out


# ---------------------------------------------------------------------------
# simplex integrals
# ---------------------------------------------------------------------------


def _J_recursive(ns, u, nodes, weights):
    """``int_{x_1+...+x_k < u} prod x_i^{n_i-1} dx`` by nested Gauss-Legendre rules.

    ``u`` may be an array; the last coordinate is integrated over ``(0, u)``
    and the remaining ``k - 1`` recursively over ``(0, u - x_k)``.
    """
    u = np.asarray(u, dtype=float)
    if not ns:
        return np.ones_like(u)
    head, rest = ns[-1], ns[:-1]
    x = 0.5 * u[..., None] * (nodes + 1.0)
    inner = _J_recursive(rest, u[..., None] - x, nodes, weights)
    return 0.5 * u * np.sum(weights * x ** (head - 1) * inner, axis=-1)


def j_integral_check(ns):
    """``(numeric, exact)`` for ``int_0^inf J_{n_1..n_k}(u) e^{-u} du = prod (n_i - 1)!``."""
    ns = tuple(int(n) for n in ns)
    if not ns or len(ns) > 4 or sum(ns) > 8 or min(ns) < 1:
        raise ValueError("need 1 <= k <= 4 multiplicities >= 1 with sum <= 8")
    nodes, weights = np.polynomial.legendre.leggauss(sum(ns) + 1)
    val = integrate.quad(lambda u: float(_J_recursive(ns, u, nodes, weights)) * math.exp(-u), 0.0, np.inf,
                         epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    exact = float(math.prod(math.factorial(n - 1) for n in ns))
    return val, exact


def log_gamma_ratio(a, b):
    return float(gammaln(a) - gammaln(b))
