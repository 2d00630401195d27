"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names (``loop_sums``, ``transfer_path_sums``, ``walk_log_weights``)
dispatch according to :data:`pamlab._accel.USE_NUMBA`. Both flavours take the
same pre-drawn inputs, so they agree up to floating-point summation order.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# weighted loop sums: out[i] = sum_k w[k] * exp(sum_j E[k, j] * logf[i, j])
# ---------------------------------------------------------------------------


def loop_sums_numpy(logf, exponents, weights):
    return np.exp(logf @ exponents.T) @ weights


@njit(cache=True)
def loop_sums_numba(logf, exponents, weights):
    n, m = logf.shape
    K = exponents.shape[0]
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for k in range(K):
            s = 0.0
            for j in range(m):
                e = exponents[k, j]
                if e != 0.0:
                    s += e * logf[i, j]
            acc += weights[k] * np.exp(s)
        out[i] = acc
    return out


# ---------------------------------------------------------------------------
# path sums by transfer: out[k-1] = sum over length-k paths x -> y of prod a(z)
# ---------------------------------------------------------------------------


def transfer_path_sums_numpy(nbr_ptr, nbr_idx, a, start, target, n_max):
    n = a.shape[0]
    adj = np.zeros((n, n))
    for i in range(n):
        adj[i, nbr_idx[nbr_ptr[i]:nbr_ptr[i + 1]]] = 1.0
    out = np.empty(n_max)
    u = np.zeros(n)
    u[start] = a[start]
    out[0] = u[target]
    for k in range(1, n_max):
        u = a * (adj @ u)
        out[k] = u[target]
    return out


@njit(cache=True)
def transfer_path_sums_numba(nbr_ptr, nbr_idx, a, start, target, n_max):
    n = a.shape[0]
    out = np.empty(n_max)
    u = np.zeros(n)
    w = np.zeros(n)
    u[start] = a[start]
    out[0] = u[target]
    for k in range(1, n_max):
        for i in range(n):
            s = 0.0
            for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
                s += u[nbr_idx[p]]
            w[i] = a[i] * s
        for i in range(n):
            u[i] = w[i]
        out[k] = u[target]
    return out


# ---------------------------------------------------------------------------
# Feynman-Kac weights of continuous-time walks: sum_x H(local time at x)
# ---------------------------------------------------------------------------


def walk_log_weights_numpy(hold, steps, t, h_table, h_step):
    """``hold`` (n, K) holding times, ``steps`` (n, K-1) integer site-key
    increments. Returns the per-path sum of H over the occupation times.
    """
    n, K = hold.shape
    ends = np.cumsum(hold, axis=1)
    begins = ends - hold
    occ = np.clip(np.minimum(ends, t) - begins, 0.0, None)
    keys = np.zeros((n, K), dtype=np.int64)
    if K > 1:
        keys[:, 1:] = np.cumsum(steps, axis=1)
    order = np.argsort(keys, axis=1, kind="stable")
    ks = np.take_along_axis(keys, order, axis=1)
    ds = np.take_along_axis(occ, order, axis=1)
    cs = np.cumsum(ds, axis=1)
    last = np.ones((n, K), dtype=bool)
    last[:, :-1] = ks[:, :-1] != ks[:, 1:]
    # cumulative sum at the previous run end, per row
    col = np.broadcast_to(np.arange(K), (n, K))
    end_idx = np.where(last, col, -1)
    prev = np.full((n, K), -1)
    prev[:, 1:] = np.maximum.accumulate(end_idx, axis=1)[:, :-1]
    base = np.where(prev >= 0, np.take_along_axis(cs, np.maximum(prev, 0), axis=1), 0.0)
    seg = np.where(last, cs - base, 0.0)
    return np.sum(_interp_uniform_numpy(seg, h_table, h_step), axis=1)


def _interp_uniform_numpy(x, table, step):
    pos = x / step
    i = np.minimum(np.floor(pos).astype(np.int64), table.shape[0] - 2)
    frac = pos - i
    return table[i] * (1.0 - frac) + table[i + 1] * frac


@njit(cache=True)
def walk_log_weights_numba(hold, steps, t, h_table, h_step):
    n, K = hold.shape
    out = np.zeros(n)
    keys = np.empty(K, dtype=np.int64)
    occ = np.empty(K)
    top = h_table.shape[0] - 2
    for p in range(n):
        m = 0
        key = 0
        clock = 0.0
        for j in range(K):
            if j > 0:
                key += steps[p, j - 1]
            if clock >= t:
                break
            stay = hold[p, j]
            if clock + stay > t:
                stay = t - clock
            clock += hold[p, j]
            found = -1
            for q in range(m):
                if keys[q] == key:
                    found = q
                    break
            if found >= 0:
                occ[found] += stay
            else:
                keys[m] = key
                occ[m] = stay
                m += 1
        acc = 0.0
        for q in range(m):
            pos = occ[q] / h_step
            i = int(np.floor(pos))
            if i > top:
                i = top
            frac = pos - i
            acc += h_table[i] * (1.0 - frac) + h_table[i + 1] * frac
        out[p] = acc
    return out


if USE_NUMBA:
    loop_sums = loop_sums_numba
    transfer_path_sums = transfer_path_sums_numba
    walk_log_weights = walk_log_weights_numba
else:
    loop_sums = loop_sums_numpy
    transfer_path_sums = transfer_path_sums_numpy
    walk_log_weights = walk_log_weights_numpy
