"""Scaling constants, the functions B_N and zeta_N, and the scaling function h.

Conventions
-----------
``tau`` is the primitive large parameter. It is tied to the box size ``L``
through ``gamma tau^rho' / rho' = d log L`` (see :func:`log_L_from_tau`), which
is the normalisation under which ``h ~ A0 tau^{rho'-1} - 2 d kappa`` solves
``zeta_M(h) = L^{-d}`` at leading order. With ``L = exp(gamma t^rho'/rho')``
this gives ``tau = d^{1/rho'} t``.

Monte Carlo estimates of ``zeta_N`` are evaluated on one fixed set of sampled
environments (common random numbers), so the estimate is an exactly
decreasing function of ``s`` and root finding on it is well posed.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from scipy import integrate, optimize
from scipy.special import logsumexp

from . import kernels
from .environment import WeibullParams
from .lattice import Box, enumerate_paths
from .parallel import chunk_sizes
from .seeding import rng


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class ScalingConstants:
    rho: float
    gamma: float
    kappa: float = 1.0
    d: int = 1

    def __post_init__(self):
        if not self.rho > 1:
            raise DomainError("rho must exceed 1")
        if self.gamma <= 0 or self.kappa <= 0 or self.d < 1:
            raise DomainError("gamma, kappa must be positive and d >= 1")

    @property
    def rho_prime(self):
        return self.rho / (self.rho - 1.0)

    @property
    def A0(self):
        return (self.gamma * self.rho / self.rho_prime) ** (1.0 / self.rho)

    @property
    def alpha(self):
        return (self.gamma * self.rho / self.rho_prime) ** (1.0 / self.rho_prime)

    @property
    def gamma1(self):
        return self.rho_prime / self.rho

    @property
    def gamma2(self):
        return self.rho_prime / self.rho * 2.0 ** (1.0 / self.rho_prime)

    @property
    def M(self):
        return compute_M(self.rho)

    @property
    def alpha_in_range(self):
        return 0.0 < self.alpha < 2.0

    def B_script(self, N):
        return B_script(N, self.d, self.kappa)

    def summary(self):
        return {
            "rho": self.rho,
            "gamma": self.gamma,
            "kappa": self.kappa,
            "d": self.d,
            "rho_prime": self.rho_prime,
            "A0": self.A0,
            "alpha": self.alpha,
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "M": self.M,
            "B_script_M": self.B_script(self.M),
        }


def compute_M(rho):
    """Smallest ``j >= 1`` with ``2 j rho' > 2 (j + 1)``.

    The inequality is equivalent to ``j > rho - 1``; that form is evaluated
    directly so that boundary cases such as ``rho = 2`` are decided exactly.
    """
    if not rho > 1:
        raise DomainError("rho must exceed 1")
    return int(math.floor(rho - 1.0)) + 1


def log_L_from_tau(tau, consts):
    return consts.gamma * tau**consts.rho_prime / (consts.d * consts.rho_prime)


def tau_from_log_L(log_L, consts):
    return (consts.d * consts.rho_prime * log_L / consts.gamma) ** (1.0 / consts.rho_prime)


# ---------------------------------------------------------------------------
# loops at the origin
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def loop_tables(d, N):
    """Loops of ``2j+1`` sites at the origin of Z^d, j = 1..N, grouped by visit profile.

    Returns ``(box, origin_column, tables)`` where ``tables[j-1] = (E, w)``:
    row ``k`` of ``E`` counts how often each site of ``box`` (radius ``N``)
    occurs at positions ``2..2j+1`` of a loop, and ``w[k]`` is the number of
    loops sharing that count vector.
    """
    box = Box.centered(N, d)
    col = {tuple(int(c) for c in s): i for i, s in enumerate(box.sites())}
    origin = col[(0,) * d]
    tables = []
    for j in range(1, N + 1):
        groups = {}
        for path in enumerate_paths(None, (0,) * d, (0,) * d, 2 * j + 1):
            counts = [0] * len(col)
            for z in path.sites[1:]:
                counts[col[z]] += 1
            key = tuple(counts)
            groups[key] = groups.get(key, 0) + 1
        keys = sorted(groups)
        E = np.array(keys, dtype=float).reshape(len(keys), len(col))
        w = np.array([groups[k] for k in keys], dtype=float)
        tables.append((E, w))
    return box, origin, tuple(tables)


def loop_count(d, j):
    _, _, tables = loop_tables(d, j)
    return int(tables[j - 1][1].sum())


def B_script(N, d=1, kappa=1.0):
    """``2 d kappa / (1 + sum_j |loops_{2j+1}| (2d)^{-2j})``."""
    denom = 1.0 + sum(loop_count(d, j) * (2.0 * d) ** (-2 * j) for j in range(1, N + 1))
    return 2 * d * kappa / denom


def _loop_denominator(s, v0, N, d, kappa):
    """``1 + sum_{j<=N} loops_j(s, v0)`` for a batch of environments (rows of ``v0``)."""
    _, _, tables = loop_tables(d, max(N, 1))
    logf = math.log(kappa) - np.log(2 * d * kappa + np.maximum(s - v0, 0.0))
    total = np.ones(v0.shape[0])
    for E, w in tables[:N]:
        total += kernels.loop_sums(logf, E, w)
    return total


def B_N(s, env, N, consts):
    """``(s + 2 d kappa) / (1 + sum_{j<=N} sum_loops prod_{z != z_1} kappa / (2 d kappa + (s - v0(z))_+))``.

    Parameters
    ----------
    env : array
        Environment values on the radius-``N`` box around the origin, ordered
        as ``Box.centered(N, d).sites()``; one environment per row, or a
        single 1-d array. The origin value is replaced by 0.
    """
    d, k = consts.d, consts.kappa
    box, origin, _ = loop_tables(d, max(N, 1))
    v0 = np.array(env, dtype=float, ndmin=2)
    if v0.shape[1] != box.cardinality:
        # accept environments on a larger box: keep the central radius-N block
        v0 = _restrict(v0, d, N)
    v0[:, origin] = 0.0
    out = (s + 2 * d * k) / _loop_denominator(s, v0, N, d, k)
    return out if np.ndim(env) > 1 else float(out[0])


def _restrict(v, d, N):
    side = int(round(v.shape[1] ** (1.0 / d)))
    R = (side - 1) // 2
    if side**d != v.shape[1] or R < N:
        raise ValueError("environment does not cover the radius-N box")
    grid = v.reshape((v.shape[0],) + (side,) * d)
    sl = (slice(None),) + (slice(R - N, R + N + 1),) * d
    return grid[sl].reshape(v.shape[0], -1).copy()


# ---------------------------------------------------------------------------
# zeta_N
# ---------------------------------------------------------------------------


@dataclass
class EnvironmentSample:
    """Common random environments on the radius-``N`` box (origin set to 0)."""

    v0: np.ndarray
    N: int
    d: int
    seed: int


def sample_environments(n, N, d, rho, seed, chunk=1 << 16):
    """``n`` i.i.d. Weibull environments, drawn in fixed chunks keyed by ``(seed, chunk)``."""
    box, origin, _ = loop_tables(d, N)
    params = WeibullParams(rho)
    parts = [
        params.from_exponential(rng(seed, 7, i).standard_exponential((c, box.cardinality)))
        for i, c in enumerate(chunk_sizes(n, chunk))
    ]
    v0 = np.concatenate(parts, axis=0)
    v0[:, origin] = 0.0
    return EnvironmentSample(v0, N, d, seed)


def _log_weights(s, sample, N, consts):
    v0 = sample.v0 if sample.N == N else _restrict(sample.v0, sample.d, N)
    B = (s + 2 * consts.d * consts.kappa) / _loop_denominator(s, v0, N, consts.d, consts.kappa)
    return -(B**consts.rho) / consts.rho


@dataclass
class ZetaEstimate:
    value: float
    error: float
    log_value: float


def log_zeta_mc(s, sample, N, consts):
    """``log`` of the sample mean of ``exp(-B_N(s, v)^rho / rho)``."""
    lw = _log_weights(s, sample, N, consts)
    return float(logsumexp(lw) - math.log(lw.size))


def zeta_N(s, N, consts, estimator="monte_carlo", n=100_000, seed=0, sample=None):
    """Estimate ``zeta_N(s) = E exp(-B_N(s, v)^rho / rho)`` with an error bar.

    ``estimator`` is ``"monte_carlo"`` (standard error returned) or
    ``"quadrature"`` (d=1, N=1 only; absolute quadrature error returned).
    """
    if s < 0:
        raise DomainError("s must be >= 0")
    if estimator == "quadrature":
        return _zeta_quadrature(s, N, consts)
    if estimator != "monte_carlo":
        raise ValueError(f"unknown estimator {estimator!r}")
    if sample is None:
        sample = sample_environments(n, N, consts.d, consts.rho, seed)
    lw = _log_weights(s, sample, N, consts)
    top = float(np.max(lw))
    w = np.exp(lw - top)
    mean = float(np.mean(w))
    se = float(np.std(w, ddof=1) / math.sqrt(w.size)) if w.size > 1 else float("inf")
    scale = math.exp(top)
    return ZetaEstimate(mean * scale, se * scale, top + math.log(mean))


def _zeta_quadrature(s, N, consts):
    if consts.d != 1 or N != 1:
        raise NotImplementedError("quadrature is implemented for d=1, N=1 only")
    rho, k = consts.rho, consts.kappa
    f0 = k / (2 * k + s)

    def integrand_value(a, b):
        fa = k / (2 * k + max(s - a, 0.0))
        fb = k / (2 * k + max(s - b, 0.0))
        B = (s + 2 * k) / (1.0 + f0 * (fa + fb))
        return math.exp(-(B**rho) / rho)

    dens = lambda y: y ** (rho - 1) * math.exp(-(y**rho) / rho)  # noqa: E731
    tail = math.exp(-(s**rho) / rho)  # mass of {v >= s}; the factor is constant there
    opts = dict(epsabs=1e-13, epsrel=1e-11, limit=200)
    if s > 0:
        inner = lambda a: integrate.quad(lambda b: integrand_value(a, b) * dens(b), 0.0, s, **opts)[0]  # noqa: E731
        both, e1 = integrate.quad(lambda a: inner(a) * dens(a), 0.0, s, **opts)
        one, e2 = integrate.quad(lambda a: integrand_value(a, s) * dens(a), 0.0, s, **opts)
    else:
        both = one = e1 = e2 = 0.0
    val = both + 2 * tail * one + tail * tail * integrand_value(s, s)
    err = e1 + 2 * tail * e2
    return ZetaEstimate(val, err, math.log(val))


# ---------------------------------------------------------------------------
# scaling function
# ---------------------------------------------------------------------------


@dataclass
class ScalingSolution:
    tau: float
    log_L: float
    h: float
    residual: float  # |zeta_M(h) L^d - 1|
    tol: float
    expansion_terms: list = field(default_factory=list)


def _upper_bracket(target_log, N, consts):
    # B_N(s, v) >= (s + 2dk) B_script_N / (2dk) for every environment
    d, k, rho = consts.d, consts.kappa, consts.rho
    return (2 * d * k / consts.B_script(N)) * (-rho * target_log) ** (1.0 / rho) - 2 * d * k + 1.0


def solve_h(log_L, consts, tol=1e-8, n=100_000, seed=0, sample=None, N=None):
    """Root ``h`` of ``zeta_M(h) = L^{-d}`` on common random environments.

    ``log_L`` is ``log L`` (``L`` itself overflows for the sizes of interest).
    """
    N = consts.M if N is None else N
    if sample is None:
        sample = sample_environments(n, N, consts.d, consts.rho, seed)
    target = -consts.d * log_L
    f = lambda s: log_zeta_mc(s, sample, N, consts) - target  # noqa: E731
    f0 = -(consts.B_script(N) ** consts.rho) / consts.rho - target
    if f0 < -1e-13 * max(1.0, abs(target)):
        raise DomainError("L^{-d} exceeds the range of zeta_M (t below t0)")
    tau = tau_from_log_L(log_L, consts)
    if f0 <= 0:
        return ScalingSolution(tau, log_L, 0.0, abs(math.expm1(f0)), tol)
    hi = _upper_bracket(target, N, consts)
    while f(hi) > 0:
        hi *= 2
    h = optimize.brentq(f, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    res = abs(math.expm1(f(h)))
    return ScalingSolution(tau, log_L, float(h), res, tol)


def h_expansion(tau, consts, n=100_000, seed=0, sample=None):
    """Terms ``[h_0, ..., h_M]`` of the recursive expansion at ``tau``.

    ``h_0 = A0 tau^{rho'-1} - 2 d kappa`` and, for ``j >= 1``,
    ``h_j = A0^{1-rho} (gamma tau^{rho'-1}/rho' + log zeta_j(h_0 + ... + h_{j-1}) / tau)``
    with ``zeta_j`` estimated on the shared environment sample.
    """
    c = consts
    M = c.M
    h0 = c.A0 * tau ** (c.rho_prime - 1) - 2 * c.d * c.kappa
    if h0 < 0:
        raise DomainError(f"h_0 = {h0} < 0; increase tau")
    if sample is None:
        sample = sample_environments(n, M, c.d, c.rho, seed)
    terms = [h0]
    for j in range(1, M + 1):
        lz = log_zeta_mc(sum(terms), sample, j, c)
        terms.append(c.A0 ** (1 - c.rho) * (c.gamma * tau ** (c.rho_prime - 1) / c.rho_prime + lz / tau))
    return terms


# ---------------------------------------------------------------------------
# explicit expansions
# ---------------------------------------------------------------------------

RHO_MAX_EXPANSION = (3 + math.sqrt(17)) / 2


def K_constants(consts):
    """``K_1 ... K_5`` of the explicit expansion for ``3 <= rho < (3 + sqrt 17)/2``."""
    c = consts
    rho, rp, A0 = c.rho, c.rho_prime, c.A0
    K1 = c.gamma * rho / rp * c.kappa**2 * A0**-3
    K2 = A0 ** (2 - rho) * K1
    K3 = K1 * (A0 * K1) ** (1 / (rho - 1)) / A0 ** (rho - 1) * (1 - A0 / rho)
    K4 = (3 - 2 * rp) * math.log(A0) + 0.5 * math.log(math.pi * (rho - 1)) - A0 ** (3 - rho) * K1**2
    K5 = rho / (2 * (rho - 1))
    return {"K1": K1, "K2": K2, "K3": K3, "K4": K4, "K5": K5}


def explicit_h_expansion(tau, consts, variant="cubic"):
    """Closed-form partial expansion of ``h`` for the three ranges of ``rho``.

    ``variant="cubic"`` uses the second-order coefficient ``2 d kappa^2 A0^3``
    for ``2 <= rho < 3``. ``variant="inverse"`` uses ``2 d kappa^2 / A0``,
    which is what one gets by inserting the leading behaviour of
    ``log zeta_1(h_0)`` into the recursion; the two agree when ``A0 = 1``.
    """
    c = consts
    rho, rp = c.rho, c.rho_prime
    base = c.A0 * tau ** (rp - 1) - 2 * c.d * c.kappa
    if rho < 2:
        return base
    if rho < 3:
        if variant not in ("cubic", "inverse"):
            raise ValueError(f"unknown variant {variant!r}")
        coef = c.A0**3 if variant == "cubic" else 1.0 / c.A0
        return base + 2 * c.d * c.kappa**2 * coef * tau ** (1 - rp)
    if rho < RHO_MAX_EXPANSION:
        K = K_constants(c)
        return (
            base
            + K["K2"] * tau ** (1 - rp)
            + K["K3"] * tau ** (rho / (rho - 1) * (3 - 2 * rp) - 1)
            + K["K4"] / tau
            + K["K5"] * math.log(tau)
        )
    raise DomainError(f"no closed-form expansion for rho >= {RHO_MAX_EXPANSION:.6f}")


# ---------------------------------------------------------------------------
# saddle point
# ---------------------------------------------------------------------------


def _r_funcs(tau, consts, K1):
    c = consts
    A0, rho, rp = c.A0, c.rho, c.rho_prime
    top = A0 * tau ** (rp - 1)
    r = lambda x: A0**2 * K1 * tau / (top - x) - x**rho / rho + (rho - 1) * math.log(x)  # noqa: E731
    r1 = lambda x: A0**2 * K1 * tau / (top - x) ** 2 - x ** (rho - 1) + (rho - 1) / x  # noqa: E731
    r2 = lambda x: 2 * A0**2 * K1 * tau / (top - x) ** 3 - (rho - 1) * x ** (rho - 2) - (rho - 1) / x**2  # noqa: E731
    return r, r1, r2, top


def _golden_max(f, a, b, iters=200):
    """Golden-section search for the maximiser of a unimodal ``f`` on ``[a, b]``."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
        if b - a < 1e-14 * max(1.0, abs(a)):
            break
    return 0.5 * (a + b)


def saddle_point_check(tau, consts, eps=0.05, n_mc=0, seed=0):
    """Maximise ``r(x) = A0^2 K1 tau/(A0 tau^{rho'-1} - x) - x^rho/rho + (rho-1) log x``.

    The maximiser is located by golden-section search on
    ``(0, (1-eps) A0 tau^{rho'-1})`` and polished by Newton steps on ``r'``.
    It is compared with two leading-order predictions: ``(A0 K1)^{1/(rho-1)}
    tau^{(3-2rho')/(rho-1)}`` (``ratio_a0k1``) and
    ``K1^{1/(rho-1)} tau^{(3-2rho')/(rho-1)}`` (``ratio_k1``, the root
    of ``K1 tau^{3-2rho'} = x^{rho-1}``). They coincide when ``A0 = 1``.

    With ``n_mc > 0`` the report also carries a Monte Carlo estimate of
    ``log E exp(-B_1(h_0, v)^rho/rho)`` next to the Laplace-method form.
    """
    c = consts
    if not 3 < c.rho <= 4:
        raise DomainError("saddle-point expansion needs 3 < rho <= 4")
    K1 = K_constants(c)["K1"]
    r, r1, r2, top = _r_funcs(tau, c, K1)
    lo, hi = 1e-12 * top, (1 - eps) * top
    x = math.exp(_golden_max(lambda y: r(math.exp(y)), math.log(lo), math.log(hi)))
    for _ in range(50):
        step = r1(x) / r2(x)
        xn = x - step
        if not (0 < xn < hi):
            break
        x = xn
        if abs(step) <= 1e-15 * x:
            break
    expo = (3 - 2 * c.rho_prime) / (c.rho - 1)
    lead_a0k1 = (c.A0 * K1) ** (1 / (c.rho - 1)) * tau**expo
    lead_k1 = K1 ** (1 / (c.rho - 1)) * tau**expo
    report = {
        "tau": tau,
        "x_t": x,
        "r_prime": r1(x),
        "r_second": r2(x),
        "boundary": x >= hi * (1 - 1e-9) or x <= lo * (1 + 1e-9),
        "lead_a0k1": lead_a0k1,
        "lead_k1": lead_k1,
        "ratio_a0k1": x / lead_a0k1,
        "ratio_k1": x / lead_k1,
        "r_max": r(x),
    }
    if n_mc:
        h0 = c.A0 * tau ** (c.rho_prime - 1) - 2 * c.d * c.kappa
        sample = sample_environments(n_mc, 1, c.d, c.rho, seed)
        report["log_E_mc"] = log_zeta_mc(h0, sample, 1, c)
        width = tau ** ((c.rho - 2) / (c.rho - 1) * (3 - 2 * c.rho_prime))
        report["log_laplace"] = r(x) + 0.5 * math.log(math.pi * (c.rho - 1) / width)
    return report
