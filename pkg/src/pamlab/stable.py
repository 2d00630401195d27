"""Totally asymmetric stable laws, Levy-Khintchine triples and triangular-array diagnostics."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn

from .lattice import default_scales
from .pde import log_total_mass_batch
from .parallel import chunk_sizes, pmap
from .scaling import sample_environments, solve_h
from .seeding import rng

EULER_GAMMA = 0.5772156649015329


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class StableLaw:
    alpha: float

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise DomainError("alpha must lie in (0, 2)")


def _stable_cf_scalar(alpha, u):
    if u == 0:
        return 1.0 + 0.0j
    sg = 1.0 if u > 0 else -1.0
    au = abs(u)
    if alpha == 1.0:
        return complex(np.exp(1j * u * (1 - EULER_GAMMA) - (math.pi / 2) * au * (1 + 1j * sg * (2 / math.pi) * math.log(au))))
    rot = np.exp(-1j * math.pi * alpha * sg / 2)
    if alpha < 1:
        return complex(np.exp(-gamma_fn(1 - alpha) * au**alpha * rot))
    return complex(np.exp(gamma_fn(2 - alpha) / (alpha - 1) * au**alpha * rot))


def stable_cf(law, u):
    """Characteristic function of the skewness-one stable law with exponent ``alpha``.

    Accepts a scalar or array ``u``.
    """
    alpha = law.alpha if isinstance(law, StableLaw) else StableLaw(float(law)).alpha
    if np.ndim(u) == 0:
        return _stable_cf_scalar(alpha, float(u))
    return np.array([_stable_cf_scalar(alpha, float(x)) for x in np.ravel(u)]).reshape(np.shape(u))


def drift_nu(alpha):
    """``alpha pi / (2 cos(alpha pi / 2))``."""
    return alpha * math.pi / (2 * math.cos(alpha * math.pi / 2))


@dataclass
class LevyTriple:
    """Drift, Gaussian variance and spectral function.

    The spectral function is either the power law ``L(x) = -x^{-alpha}`` on
    ``x > 0`` (``power_alpha`` set) or a discrete measure with ``atoms`` and
    ``masses`` on ``x > 0`` (an empirical step function).
    """

    nu: float
    sigma2: float = 0.0
    power_alpha: float | None = None
    atoms: np.ndarray = field(default_factory=lambda: np.zeros(0))
    masses: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def spectral_function(self, x):
        x = np.asarray(x, dtype=float)
        if self.power_alpha is not None:
            return np.where(x > 0, -np.abs(x) ** -self.power_alpha, 0.0)
        atoms = np.sort(self.atoms)
        order = np.argsort(self.atoms)
        cum = np.concatenate([np.cumsum(self.masses[order][::-1])[::-1], [0.0]])
        return np.where(x > 0, -cum[np.searchsorted(atoms, x, side="right")], 0.0)


_QUAD = dict(epsabs=1e-12, epsrel=1e-11, limit=400)


def _sin_minus_id_cubed(y):
    """``(sin y - y) / y^3`` without cancellation near 0."""
    if abs(y) < 1e-2:
        y2 = y * y
        return -1.0 / 6 + y2 / 120 - y2 * y2 / 5040
    return (math.sin(y) - y) / y**3


def _power_integral(alpha, u):
    """``alpha int_0^inf (e^{iux} - 1 - iux/(1+x^2)) x^{-alpha-1} dx`` for ``u > 0``."""
    a = alpha
    # (0, 1]: write the integrands as smooth functions times x^{1-a}, x^{2-a}
    re0 = integrate.quad(lambda x: -2.0 * math.sin(u * x / 2) ** 2 / (x * x) if x > 0 else -u * u / 2,
                         0.0, 1.0, weight="alg", wvar=(1 - a, 0.0))[0]
    im0 = integrate.quad(lambda x: u**3 * _sin_minus_id_cubed(u * x) + u / (1 + x * x),
                         0.0, 1.0, weight="alg", wvar=(2 - a, 0.0))[0]
    # (1, inf): oscillatory parts by Fourier quadrature, the rest after x = e^y
    cos_t = integrate.quad(lambda x: x ** (-a - 1), 1.0, np.inf, weight="cos", wvar=u, limlst=200)[0]
    sin_t = integrate.quad(lambda x: x ** (-a - 1), 1.0, np.inf, weight="sin", wvar=u, limlst=200)[0]
    one_t = 1.0 / a
    drift_t = integrate.quad(lambda y: math.exp(-a * y) / (1.0 + math.exp(-2 * y)) * math.exp(-y), 0.0, np.inf, **_QUAD)[0]
    re = re0 + cos_t - one_t
    im = im0 + sin_t - u * drift_t
    return a * complex(re, im)


def infdiv_cf(triple, u):
    """``exp(i nu u - sigma^2 u^2/2 + int (e^{iux} - 1 - iux/(1+x^2)) dL(x))``."""
    if np.ndim(u) > 0:
        return np.array([infdiv_cf(triple, float(x)) for x in np.ravel(u)]).reshape(np.shape(u))
    u = float(u)
    if u == 0:
        return 1.0 + 0.0j
    if u < 0:
        return np.conj(infdiv_cf(triple, -u))
    if triple.power_alpha is not None:
        integral = _power_integral(triple.power_alpha, u)
    else:
        x, m = np.asarray(triple.atoms, float), np.asarray(triple.masses, float)
        integral = complex(np.sum(m * (np.exp(1j * u * x) - 1 - 1j * u * x / (1 + x * x))))
    return complex(np.exp(1j * triple.nu * u - triple.sigma2 * u * u / 2 + integral))


# ---------------------------------------------------------------------------
# triangular arrays
# ---------------------------------------------------------------------------


@dataclass
class TriangularArraySample:
    t: float
    n_t: float
    Y: np.ndarray
    regime: str = "below_gamma1"  # or "gamma1", "above_gamma1"
    log_h: float | None = None
    meta: dict = field(default_factory=dict)

    def centering(self):
        """Per-variable centring for the regime: 0, ``E[Y; Y<=1]`` or ``E[Y]`` (empirical)."""
        if self.regime == "below_gamma1":
            return 0.0
        if self.regime == "gamma1":
            return float(np.mean(np.where(self.Y <= 1.0, self.Y, 0.0)))
        return float(np.mean(self.Y))


def pareto_surrogate(alpha, n_t, size, seed):
    """``Y = (n_t U)^{-1/alpha}``, so ``n_t P(Y > x) = x^{-alpha}`` for ``x >= n_t^{-1/alpha}``."""
    u = rng(seed, 11).random(size)
    u = np.where(u == 0.0, np.finfo(float).tiny, u)
    return (n_t * u) ** (-1.0 / alpha)


@dataclass
class Diagnostics:
    x_grid: np.ndarray
    L_hat: np.ndarray
    sigma2: float
    nu: float
    triple: LevyTriple


def triangular_diagnostics(sample, x_grid, y, centering=None):
    """Empirical version of the convergence criteria for ``sum_i Y_i``.

    ``L_hat(x) = -n P(Y > x)``; ``sigma2 = n Var(Y 1{Y<=y})``; ``nu`` is
    ``n E[Y 1{Y<=y}] - A + int_{x>y} x/(1+x^2) dL - int_{0<x<=y} x^3/(1+x^2) dL``
    with the empirical measure (atoms at the samples, mass ``n/size`` each).
    """
    Y = np.asarray(sample.Y, dtype=float)
    n = float(sample.n_t)
    N = Y.size
    x_grid = np.asarray(x_grid, dtype=float)
    srt = np.sort(Y)
    L_hat = -n * (N - np.searchsorted(srt, x_grid, side="right")) / N
    Z = np.where(np.abs(Y) <= y, Y, 0.0)
    sigma2 = n * float(np.var(Z)) if N > 1 else 0.0
    A = n * (sample.centering() if centering is None else centering)
    pos = Y > 0
    mass = n / N
    big = pos & (Y > y)
    small = pos & (Y <= y)
    nu = n * float(np.mean(Z)) - A + mass * float(np.sum(Y[big] / (1 + Y[big] ** 2))) - mass * float(
        np.sum(Y[small] ** 3 / (1 + Y[small] ** 2))
    )
    triple = LevyTriple(nu, sigma2, None, Y[pos], np.full(int(pos.sum()), mass))
    return Diagnostics(x_grid, L_hat, sigma2, nu, triple)


def truncated_moment_check(samples, n_t, alpha, y=1.0, centering=0.0):
    """Compare ``n (E[Y; Y<=y] - A)`` and ``n E[Y^2; Y<=y]`` with their power-law limits."""
    Y = np.asarray(samples, dtype=float)
    keep = Y <= y
    first = n_t * (float(np.mean(np.where(keep, Y, 0.0))) - centering)
    second = n_t * float(np.mean(np.where(keep, Y * Y, 0.0)))
    lim1 = alpha / (1 - alpha) * y ** (1 - alpha) if alpha != 1 else math.log(y)
    lim2 = alpha / (2 - alpha) * y ** (2 - alpha)
    return {
        "first": first,
        "first_limit": lim1,
        "first_rel_err": abs(first - lim1) / abs(lim1) if lim1 else abs(first),
        "second": second,
        "second_limit": lim2,
        "second_rel_err": abs(second - lim2) / abs(lim2),
    }


def tail_exponent_check(sample, n_t=None, band=(0.25, 4.0), min_tail=100, n_grid=30):
    """Slope of ``log(n P(Y > u))`` against ``log u``; returns a dict with ``alpha_hat``.

    The fit uses the levels ``u`` whose expected exceedance count
    ``n P(Y > u)`` lies in ``band``, i.e. the window around ``Y ~ 1`` where
    the limit law's tail ``u^-alpha`` is meant to apply. Tail probabilities
    are clipped to ``[min_tail / N, 0.5]``; ``wide`` flags a clipped band.
    """
    if isinstance(sample, TriangularArraySample):
        Y, n_t = np.asarray(sample.Y, float), sample.n_t
    else:
        Y = np.asarray(sample, float)
    N = Y.size
    if not n_t or N < 2:
        return {"alpha_hat": float("nan"), "wide": True, "u": np.array([]), "tail": np.array([])}
    p_lo, p_hi = band[0] / n_t, band[1] / n_t
    wide = p_hi > 0.5 or p_lo < min_tail / N
    p_hi, p_lo = min(p_hi, 0.5), max(p_lo, min_tail / N)
    srt = np.sort(Y)
    if p_hi <= p_lo:
        return {"alpha_hat": float("nan"), "wide": True, "u": np.array([]), "tail": np.array([])}
    probs = np.geomspace(p_hi, p_lo, n_grid)
    u = np.unique(srt[np.clip(np.floor(N * (1.0 - probs)).astype(int), 0, N - 1)])
    u = u[u > 0]
    tail = (N - np.searchsorted(srt, u, side="right")) / N
    ok = tail > 0
    if ok.sum() < 2:
        return {"alpha_hat": float("nan"), "wide": True, "u": u, "tail": tail}
    slope, icpt = np.polyfit(np.log(u[ok]), np.log(n_t * tail[ok]), 1)
    at_one = n_t * float(np.mean(Y > 1.0))
    return {"alpha_hat": float(-slope), "intercept": float(icpt), "wide": wide, "u": u, "tail": tail,
            "n_tail_at_1": at_one}


def cf_distance(Y, n_t, alpha, u_grid, centering=0.0):
    """``max_u |phi_hat(u)^n e^{-i u n A} - phi_alpha(u)|`` with ``phi_hat`` the sample CF of ``Y``."""
    Y = np.asarray(Y, dtype=float)
    u_grid = np.asarray(u_grid, dtype=float)
    emp = np.array([np.mean(np.exp(1j * u * Y)) for u in u_grid])
    # n-th power through the principal log; phi_hat stays close to 1 for small u
    emp_sum = np.exp(n_t * (np.log(emp) - 1j * u_grid * centering))
    ref = stable_cf(StableLaw(alpha), u_grid)
    return float(np.max(np.abs(emp_sum - ref))), emp_sum, ref


# ---------------------------------------------------------------------------
# parabolic Anderson pipeline
# ---------------------------------------------------------------------------


def regime_of(consts, rel=1e-12):
    if abs(consts.gamma - consts.gamma1) <= rel * consts.gamma1:
        return "gamma1"
    return "below_gamma1" if consts.gamma < consts.gamma1 else "above_gamma1"


def _box_masses(job):
    seed, t, tag, count, side, rho, kappa = job
    g = rng(seed, 23, int(round(t * 1000)), tag)
    v = (rho * g.standard_exponential((count, side))) ** (1.0 / rho)
    return log_total_mass_batch(v, kappa, t, d=1)


def simulate_mL(consts, t, seed, n_env, workers=1, chunk=500, h_samples=100_000, max_box=4096):
    """Independent main-box masses rescaled by ``e^{t h(t)}``.

    Scales come from :func:`pamlab.lattice.default_scales`; each replica is a
    main box of side ``l - 2r`` with a fresh Weibull environment. ``h`` solves
    ``zeta_M(h) = L^{-d}`` with ``log L = gamma t^rho'/rho'`` on a fixed
    environment sample. Only ``d = 1`` is implemented.
    """
    if consts.d != 1:
        raise NotImplementedError("the box-mass pipeline is implemented for d=1")
    L, l, r = default_scales(t, consts.gamma, consts.rho_prime)
    side = l - 2 * r
    if side > max_box:
        raise ValueError(f"main box of {side} sites exceeds the cap {max_box}; use a smaller t")
    n_t = (L // l) ** consts.d
    log_L = consts.gamma * t**consts.rho_prime / consts.rho_prime
    hs = solve_h(log_L, consts, sample=sample_environments(h_samples, consts.M, consts.d, consts.rho, seed))
    jobs = [(seed, t, i, c, side, consts.rho, consts.kappa) for i, c in enumerate(chunk_sizes(n_env, chunk))]
    log_m = np.concatenate(pmap(_box_masses, jobs, workers))
    Y = np.exp(log_m - t * hs.h)
    meta = {"L": L, "l": l, "r": r, "box_side": side, "h": hs.h, "log_L": log_L}
    return TriangularArraySample(float(t), float(n_t), Y, regime_of(consts), None, meta)
