"""Dirichlet parabolic Anderson equation on a finite box.

``d m/dt = kappa*Laplacian m + v m`` on ``U`` with ``m = 0`` outside ``U`` and
``m(., 0) = 1_U``. The eigendecomposition route is the production solver;
:func:`solve_ode` is a separately written Dormand-Prince integrator used only
to cross-check it.
"""

from dataclasses import dataclass
import math

import numpy as np

from .spectral import SchrodingerOperator, assemble


class IntegrationError(RuntimeError):
    pass


@dataclass
class SolutionField:
    """Solution values on ``sites`` at time ``t``; ``log_values`` avoids overflow."""

    sites: np.ndarray
    t: float
    log_values: np.ndarray

    @property
    def values(self):
        return np.exp(self.log_values)


def _operator(U, v, kappa):
    return U if isinstance(U, SchrodingerOperator) else SchrodingerOperator(U, v, kappa)


def _log_field(top, combo):
    with np.errstate(divide="ignore"):
        return top + np.log(np.clip(combo, 0.0, None))


def solve_spectral(U, v, kappa, t, initial=None):
    """``m(x,t) = sum_n e^{t lambda_n} psi_n(x) (psi_n, m0)`` from a dense eigendecomposition."""
    op = _operator(U, v, kappa)
    if np.any(op.w < 0):
        raise ValueError("potential must be nonnegative")
    m0 = np.ones(op.n) if initial is None else np.asarray(initial, dtype=float)
    vals, vecs = np.linalg.eigh(assemble(op))
    top = vals[-1]
    coef = np.exp(t * (vals - top)) * (vecs.T @ m0)
    return SolutionField(op.sites, float(t), _log_field(t * top, vecs @ coef))


def log_total_mass_batch(v, kappa, t, d=1):
    """``log sum_x m(x,t)`` for a batch of 1-d interval potentials ``v`` (rows).

    Only ``d = 1`` intervals are supported; each row is one independent box.
    """
    if d != 1:
        raise NotImplementedError("batched masses are implemented for d=1 intervals")
    v = np.atleast_2d(np.asarray(v, dtype=float))
    n_rep, n = v.shape
    M = np.zeros((n_rep, n, n))
    idx = np.arange(n)
    M[:, idx, idx] = v - 2 * kappa
    M[:, idx[:-1], idx[1:]] = kappa
    M[:, idx[1:], idx[:-1]] = kappa
    vals, vecs = np.linalg.eigh(M)
    top = vals[:, -1]
    c = vecs.sum(axis=1)  # (psi_n, 1)
    mass = np.sum(np.exp(t * (vals - top[:, None])) * c * c, axis=1)
    return t * top + np.log(mass)


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def solve_ode(U, v, kappa, t, rtol=1e-11, initial=None, max_step=None):
    """Adaptive explicit Runge-Kutta integration of the linear system.

    The step is capped at ``max_step`` (default ``1 / max|A_ii|``) which keeps
    the one-step map close to ``I + h A`` with nonnegative entries, so the
    discrete solution stays nonnegative. The state is renormalised whenever it
    grows past ``1e100``, with the scale carried in log space.
    """
    op = _operator(U, v, kappa)
    A = assemble(op)
    y = np.ones(op.n) if initial is None else np.asarray(initial, dtype=float).copy()
    log_scale = 0.0
    if max_step is None:
        max_step = 1.0 / max(1.0, float(np.max(np.abs(np.diag(A)))))
    clock = 0.0
    h = min(max_step, t) if t > 0 else 0.0
    k = np.empty((7, op.n))
    while clock < t:
        h = min(h, t - clock)
        if h <= 1e-14 * max(1.0, t):
            raise IntegrationError("step size underflow")
        k[0] = A @ y
        for s in range(1, 7):
            k[s] = A @ (y + h * (np.asarray(_A[s]) @ k[:s]))
        y5 = y + h * (_B5 @ k)
        y4 = y + h * (_B4 @ k)
        scale = rtol * np.maximum(np.abs(y), np.abs(y5)) + rtol * 1e-3 * np.max(np.abs(y5))
        err = float(np.max(np.abs(y5 - y4) / scale))
        if err <= 1.0:
            clock += h
            y = y5
            peak = float(np.max(np.abs(y)))
            if peak > 1e100:
                y /= peak
                log_scale += math.log(peak)
        h = min(max_step, h * min(5.0, max(0.2, 0.9 * err ** -0.2 if err > 0 else 5.0)))
    return SolutionField(op.sites, float(t), _log_field(log_scale, y))


def total_mass(field):
    return float(np.sum(field.values))


def log_total_mass(field):
    top = float(np.max(field.log_values))
    return top + math.log(float(np.sum(np.exp(field.log_values - top))))


def rate_function(y):
    """``I(y) = y asinh(y) - sqrt(1 + y^2) + 1``."""
    y = np.asarray(y, dtype=float)
    return y * np.arcsinh(y) - np.sqrt(1.0 + y * y) + 1.0


def truncation_bound(R, t, beta, kappa, H_of_beta_t, d=1):
    """Factor multiplying the unspecified constant in the box-truncation moment bound.

    ``(R+1)^d exp(-2 beta kappa t I(R / 2 kappa t)) exp(H(beta t))``, valid for
    ``R >= 2 kappa t``.
    """
    if R < 2 * kappa * t:
        raise ValueError("bound requires R >= 2 kappa t")
    return float((R + 1) ** d * np.exp(-2 * beta * kappa * t * rate_function(R / (2 * kappa * t)) + H_of_beta_t))
