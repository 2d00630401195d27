"""Lattice boxes, nearest-neighbour paths and the strip-box partition."""

from dataclasses import dataclass, field
import itertools
import math

import numpy as np

DEFAULT_PATH_CAP = 10**7


class ScaleError(ValueError):
    """Scale triple violates 1 <= 2r < l <= 2L+1."""


class PathCapError(RuntimeError):
    """Path enumeration refused because the count bound exceeds the cap."""


def _site(x, d=None):
    if isinstance(x, (int, np.integer)):
        x = (int(x),)
    x = tuple(int(c) for c in x)
    if d is not None and len(x) != d:
        raise ValueError(f"site {x} is not {d}-dimensional")
    return x


@dataclass(frozen=True)
class Box:
    """Sup-norm ball ``{y : ||y - center||_inf <= radius}`` in Z^d."""

    center: tuple
    radius: int

    def __post_init__(self):
        object.__setattr__(self, "center", _site(self.center))
        if self.radius < 0:
            raise ValueError("radius must be >= 0")

    @classmethod
    def centered(cls, radius, d=1):
        return cls((0,) * d, radius)

    @property
    def d(self):
        return len(self.center)

    @property
    def side(self):
        return 2 * self.radius + 1

    @property
    def cardinality(self):
        return self.side**self.d

    def __len__(self):
        return self.cardinality

    def sites(self):
        """All sites as an ``(n, d)`` int array in lexicographic order."""
        axes = [np.arange(c - self.radius, c + self.radius + 1) for c in self.center]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=1).astype(np.int64)

    def contains(self, x):
        x = _site(x, self.d)
        return all(abs(a - c) <= self.radius for a, c in zip(x, self.center))


def l1(x, y):
    return sum(abs(a - b) for a, b in zip(_site(x), _site(y)))


def unit_steps(d):
    """Nearest-neighbour steps in the fixed order +e1, -e1, +e2, -e2, ..."""
    steps = []
    for k in range(d):
        for s in (1, -1):
            e = [0] * d
            e[k] = s
            steps.append(tuple(e))
    return steps


@dataclass(frozen=True)
class Path:
    """Ordered nearest-neighbour path ``z_1 ... z_p``; ``len`` is the site count."""

    sites: tuple

    def __post_init__(self):
        sites = tuple(_site(z) for z in self.sites)
        if not sites:
            raise ValueError("a path has at least one site")
        for a, b in zip(sites, sites[1:]):
            if len(a) != len(b) or l1(a, b) != 1:
                raise ValueError(f"{a} -> {b} is not a nearest-neighbour step")
        object.__setattr__(self, "sites", sites)

    def __len__(self):
        return len(self.sites)


@dataclass(frozen=True)
class VisitProfile:
    distinct_sites: tuple
    multiplicities: tuple


def visit_profile(path):
    """Distinct sites of ``path`` in first-visit order with their visit counts."""
    counts = {}
    for z in path.sites:
        counts[z] = counts.get(z, 0) + 1
    return VisitProfile(tuple(counts), tuple(counts.values()))


def enumerate_paths(U, x, y, n, cap=DEFAULT_PATH_CAP):
    """All length-``n`` nearest-neighbour paths from ``x`` to ``y`` inside ``U``.

    Parameters
    ----------
    U : Box, iterable of sites, or None
        Container; ``None`` means all of Z^d.
    n : int
        Number of sites on the path (so ``n - 1`` steps).
    cap : int
        Refuse when ``(2d)**(n-1)`` exceeds this.

    Returns
    -------
    list of Path, lexicographic in the step sequence (step order of
    :func:`unit_steps`).
    """
    x, y = _site(x), _site(y)
    d = len(x)
    if n < 1:
        raise ValueError("n must be >= 1")
    if (2 * d) ** (n - 1) > cap:
        raise PathCapError(f"(2d)^(n-1) = {(2 * d) ** (n - 1)} exceeds cap {cap}")
    if U is None:
        inside = lambda z: True  # noqa: E731
    elif isinstance(U, Box):
        inside = U.contains
    else:
        members = {_site(z) for z in U}
        inside = members.__contains__
    if not (inside(x) and inside(y)):
        raise ValueError("endpoints must lie in U")
    dist = l1(x, y)
    if n - 1 < dist or (n - 1 - dist) % 2:
        return []
    steps = unit_steps(d)
    out = []
    trail = [x]

    def dfs(z, left):
        if left == 0:
            out.append(Path(tuple(trail)))
            return
        for e in steps:
            nz = tuple(a + b for a, b in zip(z, e))
            if l1(nz, y) > left - 1 or not inside(nz):
                continue
            trail.append(nz)
            dfs(nz, left - 1)
            trail.pop()

    dfs(x, n - 1)
    return out


def returning_walk_counts(d, max_steps):
    """Number of ``k``-step walks on Z^d returning to the origin, k = 0..max_steps.

    Computed by repeated convolution of the step distribution on a dense grid;
    independent of :func:`enumerate_paths`.
    """
    R = max_steps
    shape = (2 * R + 1,) * d
    grid = np.zeros(shape, dtype=object)
    origin = (R,) * d
    grid[origin] = 1
    counts = [1]
    for _ in range(R):
        new = np.zeros(shape, dtype=object)
        for k in range(d):
            new += np.roll(grid, 1, axis=k) + np.roll(grid, -1, axis=k)
        grid = new
        counts.append(int(grid[origin]))
    return counts


@dataclass
class StripBoxPartition:
    L: int
    l: int
    r: int
    d: int
    q: int
    q_bar: int
    lengths: tuple  # l_i
    fine: tuple  # r_i
    intervals: tuple  # I_i as (lo, hi) inclusive
    inner: tuple  # J_i as (lo, hi) inclusive, possibly empty (lo > hi)
    main_boxes: dict = field(repr=False)  # index tuple -> (n, d) site array
    strip: np.ndarray = field(repr=False)

    def main_box_cardinality(self, index):
        return int(np.prod([max(0, self.inner[i - 1][1] - self.inner[i - 1][0] + 1) for i in index]))


def strip_box_partition(L, l, r, d=1):
    """Split ``Lambda_L`` into ``q^d`` main boxes and a strip.

    ``2L+1 = q l + q_bar``; the first ``q_bar`` intervals get length ``l+1``
    and inner margin ``r+1``, the others ``l`` and ``r``. Each main box is a
    product of inner intervals ``J_i``; the strip is the rest of the box.
    """
    L, l, r = int(L), int(l), int(r)
    if not (1 <= r and 2 * r < l <= 2 * L + 1):
        raise ScaleError(f"need 1 <= 2r < l <= 2L+1, got L={L}, l={l}, r={r}")
    q, q_bar = divmod(2 * L + 1, l)
    if q_bar > q:
        raise ScaleError(f"remainder {q_bar} exceeds box count {q}; choose a smaller l")
    lengths = tuple(l + (1 if i <= q_bar else 0) for i in range(1, q + 1))
    fine = tuple(r + (1 if i <= q_bar else 0) for i in range(1, q + 1))
    intervals, inner = [], []
    lo = -L
    for li, ri in zip(lengths, fine):
        intervals.append((lo, lo + li - 1))
        inner.append((lo + ri, lo + li - 1 - ri))
        lo += li
    boxes = {}
    covered = set()
    for idx in itertools.product(range(1, q + 1), repeat=d):
        axes = [np.arange(inner[i - 1][0], inner[i - 1][1] + 1) for i in idx]
        grid = np.meshgrid(*axes, indexing="ij")
        sites = np.stack([g.ravel() for g in grid], axis=1).astype(np.int64).reshape(-1, d)
        boxes[idx] = sites
        covered.update(map(tuple, sites))
    everything = Box.centered(L, d).sites()
    strip = np.array([s for s in everything if tuple(s) not in covered], dtype=np.int64).reshape(-1, d)
    return StripBoxPartition(L, l, r, d, q, q_bar, lengths, fine, tuple(intervals), tuple(inner), boxes, strip)


def default_scales(t, gamma, rho_prime):
    """Floored scale triple ``(L, l, r) = (e^{gamma t^rho'/rho'}, e^t, t^2)``."""
    if t <= 0:
        raise ScaleError("t must be positive")
    L = math.floor(math.exp(gamma * t**rho_prime / rho_prime))
    l = math.floor(math.exp(t))
    r = math.floor(t * t)
    if not (1 <= r and 2 * r < l <= 2 * L + 1):
        raise ScaleError(f"t={t} gives (L, l, r)=({L}, {l}, {r}), violating 1 <= 2r < l <= 2L+1")
    return L, l, r


def enumerate_paths_from(x, n, d=None, cap=DEFAULT_PATH_CAP):
    """All ``(2d)^(n-1)`` length-``n`` paths on Z^d starting at ``x`` (any endpoint)."""
    x = _site(x, d)
    d = len(x)
    if (2 * d) ** (n - 1) > cap:
        raise PathCapError(f"(2d)^(n-1) = {(2 * d) ** (n - 1)} exceeds cap {cap}")
    out = []
    for steps in itertools.product(unit_steps(d), repeat=n - 1):
        trail = [x]
        for e in steps:
            trail.append(tuple(a + b for a, b in zip(trail[-1], e)))
        out.append(Path(tuple(trail)))
    return out
