"""Dirichlet Schroedinger operators ``kappa*Laplacian_U + w`` and rank-one perturbations.

The production route for the principal eigenvalue of ``H0 + h delta_x0`` is
the scalar equation ``h g_lambda(x0, x0) = 1`` solved by safeguarded Newton
iteration on linear solves. Dense diagonalisation (:func:`eigen_dense`) and
path-sum expansions (:func:`green_path`, :func:`eigenvalue_expansion_check`)
serve as independent checks.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from . import kernels
from .lattice import Box, enumerate_paths, unit_steps


class SpectralError(ValueError):
    pass


class ConvergenceError(SpectralError):
    """Path expansion requested outside its guaranteed-convergence regime."""


class ResolventError(SpectralError):
    """Spectral parameter lies on (or numerically at) the spectrum."""


class PreconditionError(SpectralError):
    pass


def _as_sites(U):
    if isinstance(U, Box):
        return U.sites()
    arr = np.asarray(list(U) if not isinstance(U, np.ndarray) else U, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


@dataclass
class SchrodingerOperator:
    """``kappa * Laplacian_U + w`` with zero boundary values outside ``U``."""

    sites: np.ndarray
    w: np.ndarray
    kappa: float = 1.0

    def __post_init__(self):
        self.sites = _as_sites(self.sites)
        self.w = np.asarray(self.w, dtype=float).reshape(-1)
        if self.w.shape[0] != self.sites.shape[0]:
            raise ValueError("one potential value per site required")
        if len({tuple(s) for s in self.sites}) != len(self.sites):
            raise ValueError("duplicate sites")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")

    @property
    def d(self):
        return self.sites.shape[1]

    @property
    def n(self):
        return self.sites.shape[0]

    @property
    def w_bar(self):
        return float(np.max(self.w))

    @cached_property
    def index(self):
        return {tuple(int(c) for c in s): i for i, s in enumerate(self.sites)}

    def idx(self, x):
        key = (int(x),) if isinstance(x, (int, np.integer)) else tuple(int(c) for c in x)
        try:
            return self.index[key]
        except KeyError:
            raise ValueError(f"site {key} not in U") from None

    @cached_property
    def neighbors(self):
        """CSR arrays ``(ptr, idx)`` of in-U nearest neighbours."""
        ptr, nbr = [0], []
        for s in self.sites:
            for e in unit_steps(self.d):
                j = self.index.get(tuple(int(a + b) for a, b in zip(s, e)))
                if j is not None:
                    nbr.append(j)
            ptr.append(len(nbr))
        return np.asarray(ptr, dtype=np.int64), np.asarray(nbr, dtype=np.int64)

    def is_connected(self):
        ptr, nbr = self.neighbors
        seen, stack = {0}, [0]
        while stack:
            i = stack.pop()
            for j in nbr[ptr[i]:ptr[i + 1]]:
                if j not in seen:
                    seen.add(int(j))
                    stack.append(int(j))
        return len(seen) == self.n


@dataclass
class RankOnePerturbation:
    """``H0 + h delta_x0`` with ``w(x0) = 0``."""

    base: SchrodingerOperator
    x0: tuple
    h: float

    def __post_init__(self):
        if self.h < 0:
            raise ValueError("h must be >= 0")
        if self.base.w[self.base.idx(self.x0)] != 0.0:
            raise PreconditionError("the potential must vanish at x0")

    @property
    def i0(self):
        return self.base.idx(self.x0)


@dataclass
class SpectralPair:
    lambda0: float
    psi0: np.ndarray
    residual: float = field(default=float("nan"))


def assemble(op):
    """Dense symmetric matrix of ``op``."""
    if isinstance(op, RankOnePerturbation):
        M = assemble(op.base)
        M[op.i0, op.i0] += op.h
        return M
    n, d, k = op.n, op.d, op.kappa
    M = np.zeros((n, n))
    ptr, nbr = op.neighbors
    for i in range(n):
        M[i, nbr[ptr[i]:ptr[i + 1]]] = k
    M[np.diag_indices(n)] = op.w - 2 * d * k
    return M


def eigen_dense(matrix):
    """Full eigendecomposition (ascending) of an exactly symmetric matrix."""
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or not np.array_equal(M, M.T):
        raise SpectralError("matrix must be square and exactly symmetric")
    vals, vecs = np.linalg.eigh(M)
    return vals, vecs


def top_eigenvalue(op):
    return float(np.linalg.eigvalsh(assemble(op))[-1])


def _resolvent_column(M, lam, j):
    n = M.shape[0]
    A = lam * np.eye(n) - M
    rhs = np.zeros(n)
    rhs[j] = 1.0
    return np.linalg.solve(A, rhs)


def green_solve(op, lam, x, y):
    """``g_lambda(x, y) = (delta_x, (lambda - H0)^{-1} delta_y)`` by a dense solve."""
    M = assemble(op)
    vals = np.linalg.eigvalsh(M)
    scale = max(1.0, float(np.max(np.abs(vals))), abs(lam))
    if np.min(np.abs(lam - vals)) <= 1e-12 * scale:
        raise ResolventError(f"lambda={lam} is on the spectrum")
    return float(_resolvent_column(M, lam, op.idx(y))[op.idx(x)])


def path_weights(op, lam):
    """Site weights ``kappa / (lambda + 2 d kappa - w(z))``."""
    return op.kappa / (lam + 2 * op.d * op.kappa - op.w)


def green_path_terms(op, lam, x, y, n_max):
    """Per-length contributions ``sum_{|gamma|=k} prod a(z)`` for k = 1..n_max."""
    ptr, nbr = op.neighbors
    a = path_weights(op, lam)
    return kernels.transfer_path_sums(ptr, nbr, a, op.idx(x), op.idx(y), int(n_max))


def green_path(op, lam, x, y, tol=1e-12, lambda_plus=None):
    """Green function as a truncated path sum with a certified tail.

    Requires ``lambda - lambda_+ > 2 d kappa``; paths are summed up to the
    shortest length ``n`` for which the geometric bound on the remainder,
    ``(1/kappa) sum_{k>n} (2d)^{k-1} a_max^k``, is below ``tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    d, k = op.d, op.kappa
    lp = top_eigenvalue(op) if lambda_plus is None else lambda_plus
    if not lam - lp > 2 * d * k:
        raise ConvergenceError(f"need lambda - lambda_+ > 2d*kappa (gap {lam - lp:.3g})")
    a_max = k / (lam + 2 * d * k - op.w_bar)
    ratio = 2 * d * a_max
    n = 1
    # tail after n terms: (1/kappa) (2d)^n a^{n+1} / (1 - 2d a)
    log_tail = lambda m: m * math.log(2 * d) + (m + 1) * math.log(a_max) - math.log(k * (1 - ratio))  # noqa: E731
    while log_tail(n) >= math.log(tol):
        n += 1
    terms = green_path_terms(op, lam, x, y, n)
    return float(np.sum(terms) / k)


def graph_distance(op, x, y):
    """Number of steps of the shortest nearest-neighbour path from ``x`` to ``y`` inside ``U``."""
    ptr, nbr = op.neighbors
    src, dst = op.idx(x), op.idx(y)
    dist = {src: 0}
    frontier = [src]
    while frontier and dst not in dist:
        nxt = []
        for i in frontier:
            for j in nbr[ptr[i]:ptr[i + 1]]:
                j = int(j)
                if j not in dist:
                    dist[j] = dist[i] + 1
                    nxt.append(j)
        frontier = nxt
    if dst not in dist:
        raise ValueError("x and y are not connected in U")
    return dist[dst]


def green_bounds(op, lam, x, y, lambda_plus=None, distance="graph"):
    """Lower and upper path-counting bounds on ``g_lambda(x, y)``.

    The lower bound keeps only the shortest paths, of ``m + 1`` sites. With
    ``distance="graph"`` ``m`` is the in-``U`` graph distance, which is what
    the shortest-path argument needs; ``distance="l1"`` uses ``|x - y|_1``,
    which equals it when ``U`` contains a lattice geodesic from ``x`` to ``y``
    (boxes, for instance) and can exceed the true value otherwise. The upper
    bound always uses ``|x - y|_1``.
    """
    d, k = op.d, op.kappa
    lp = top_eigenvalue(op) if lambda_plus is None else lambda_plus
    m1 = sum(abs(int(a) - int(b)) for a, b in zip(op.sites[op.idx(x)], op.sites[op.idx(y)]))
    if distance == "graph":
        m = graph_distance(op, x, y)
    elif distance == "l1":
        m = m1
    else:
        raise ValueError(f"unknown distance {distance!r}")
    gap = lam - lp
    lower = (k / (lam + 2 * d * k)) ** (m + 1) / k
    upper = (2 * d * k) ** m1 / gap**m1 / (gap - 2 * d * k)
    return lower, upper


def _ak_function(M0, lam, i0):
    q = _resolvent_column(M0, lam, i0)
    return q[i0], q


def principal_eigenvalue_ak(p, tol=1e-14, max_iter=200):
    """Principal eigenpair of ``H0 + h delta_x0`` from ``h g_lambda(x0, x0) = 1``.

    The function ``lambda -> h g_lambda(x0,x0) - 1`` is strictly decreasing
    above ``lambda_+`` with derivative ``-h ||q_lambda||^2``. The root is
    bracketed by ``[h - 2 d kappa, h + w_bar]``: the lower end is the Rayleigh
    quotient at ``delta_x0``, the upper end the operator-norm bound. Newton
    steps are accepted while they stay inside the bracket, otherwise bisect.
    """
    op = p.base
    d, k, h = op.d, op.kappa, p.h
    if not h > op.w_bar + 2 * d * k:
        raise PreconditionError(f"need h > w_bar + 2d*kappa = {op.w_bar + 2 * d * k}, got {h}")
    M0 = assemble(op)
    i0 = p.i0
    lo, hi = h - 2 * d * k, h + op.w_bar
    f = lambda lam: h * _ak_function(M0, lam, i0)[0] - 1.0  # noqa: E731
    f_lo = f(lo)
    # f(lo) = 0 exactly when delta_x0 is itself an eigenvector (x0 isolated in U)
    if f_lo < -64 * np.finfo(float).eps or f(hi) > 0:
        raise SpectralError("root bracket failure")
    lam = lo
    for _ in range(max_iter):
        g, q = _ak_function(M0, lam, i0)
        val = h * g - 1.0
        if val > 0:
            lo = lam
        elif val < 0:
            hi = lam
        else:
            break
        step = val / (h * float(q @ q))
        cand = lam + step
        if not (lo < cand < hi):
            cand = 0.5 * (lo + hi)
        if abs(cand - lam) <= tol * max(1.0, abs(lam)):
            lam = cand
            break
        lam = cand
    _, q = _ak_function(M0, lam, i0)
    psi = q / np.linalg.norm(q)
    if psi[i0] < 0:
        psi = -psi
    H = M0.copy()
    H[i0, i0] += h
    res = float(np.linalg.norm(H @ psi - lam * psi))
    return SpectralPair(float(lam), psi, res)


def loop_sums_from_x0(op, lam, x0, n_max, method="transfer"):
    """``sum over loops of 2j+1 sites at x0 of prod_{positions 2..} a(z)``, j = 1..n_max."""
    i0 = op.idx(x0)
    a = path_weights(op, lam)
    if method == "transfer":
        terms = green_path_terms(op, lam, x0, x0, 2 * n_max + 1)
        return np.array([terms[2 * j] for j in range(1, n_max + 1)]) / a[i0]
    if method == "enumerate":
        sites = [tuple(int(c) for c in s) for s in op.sites]
        x0 = sites[i0]
        out = []
        for j in range(1, n_max + 1):
            tot = 0.0
            for path in enumerate_paths(sites, x0, x0, 2 * j + 1):
                tot += math.prod(a[op.index[z]] for z in path.sites[1:])
            out.append(tot)
        return np.array(out)
    raise ValueError(f"unknown method {method!r}")


def eigenvalue_expansion_check(p, lambda0, n_max, method="transfer"):
    """``|lambda0 - (h - 2dk + h sum_{j<=n_max} loops_j(lambda0))|``."""
    op = p.base
    base = p.h - 2 * op.d * op.kappa
    if n_max == 0:
        return abs(lambda0 - base)
    loops = loop_sums_from_x0(op, lambda0, p.x0, n_max, method)
    return abs(lambda0 - (base + p.h * float(np.sum(loops))))


def localization_profile(p, pair=None):
    """``(|x - x0|_1, |psi0(x) - 1_{x0}(x)|)`` for every site."""
    pair = pair or principal_eigenvalue_ak(p)
    op = p.base
    x0 = op.sites[p.i0]
    dist = np.abs(op.sites - x0).sum(axis=1)
    eps = pair.psi0.copy()
    eps[p.i0] -= 1.0
    return dist, np.abs(eps)


def resolvent_identity_terms(p, lam):
    """Perturbed resolvent from the rank-one formula ``R0 + h/(1-h g) q q^T``."""
    M0 = assemble(p.base)
    n = M0.shape[0]
    R0 = np.linalg.inv(lam * np.eye(n) - M0)
    q = R0[:, p.i0]
    g = q[p.i0]
    return R0 + (p.h / (1.0 - g * p.h)) * np.outer(q, q)


def critical_coupling(op, x0, eps_ladder=(1e-2, 1e-3, 1e-4, 1e-5, 1e-6), diverge_ratio=5.0):
    """``h0 = 1 / lim_{lambda -> lambda_+} g_lambda(x0, x0)``; 0 when the limit diverges.

    ``g`` is evaluated at ``lambda_+ + eps`` along ``eps_ladder``. If the last
    rung grows like ``1/eps`` (ratio to the previous rung above
    ``diverge_ratio``) the limit is taken as infinite. Otherwise the last two
    rungs are combined by Richardson extrapolation assuming a linear leading
    correction in ``eps``.
    """
    M = assemble(op)
    lp = float(np.linalg.eigvalsh(M)[-1])
    i0 = op.idx(x0)
    g = np.array([_resolvent_column(M, lp + e, i0)[i0] for e in eps_ladder])
    if g[-1] / g[-2] > diverge_ratio:
        return 0.0
    ratio = eps_ladder[-2] / eps_ladder[-1]
    limit = (ratio * g[-1] - g[-2]) / (ratio - 1.0)
    return 1.0 / limit


def critical_coupling_spectral(op, x0, tol=1e-9):
    """Same quantity from the eigendecomposition: ``g(lambda_+) = sum_{n: lambda_n < lambda_+} psi_n(x0)^2/(lambda_+ - lambda_n)``."""
    vals, vecs = eigen_dense(assemble(op))
    i0 = op.idx(x0)
    lp = vals[-1]
    top = np.abs(vals - lp) <= tol * max(1.0, abs(lp))
    if np.any(vecs[i0, top] ** 2 > tol):
        return 0.0
    return 1.0 / float(np.sum(vecs[i0, ~top] ** 2 / (lp - vals[~top])))
