"""Compare the numba and pure-numpy kernels on representative inputs.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``. Each kernel is
called once before timing so numba compilation is excluded; the reported
figure is the best of ``--repeat`` runs. The maximum absolute difference
between the two outputs is printed alongside.
"""

import argparse
import timeit

import numpy as np

from pamlab import kernels
from pamlab._accel import HAVE_NUMBA
from pamlab.scaling import loop_tables
from pamlab.spectral import SchrodingerOperator, path_weights
from pamlab.lattice import Box


def _loop_inputs(n=100_000, N=2):
    _, _, tables = loop_tables(1, N)
    E, w = tables[-1]
    g = np.random.default_rng(0)
    logf = np.log(g.uniform(0.1, 0.5, size=(n, E.shape[1])))
    return logf, E, w


def _transfer_inputs(radius=7, n_max=400):
    box = Box.centered(radius, 2)
    g = np.random.default_rng(1)
    op = SchrodingerOperator(box, g.weibull(2.0, box.cardinality))
    lam = op.w_bar + 10.0
    ptr, idx = op.neighbors
    return ptr, idx, path_weights(op, lam), 0, op.n - 1, n_max


def _walk_inputs(n=20_000, t=4.0, rate=2.0):
    g = np.random.default_rng(2)
    K = int(rate * t + 12 * np.sqrt(rate * t + 1) + 20)
    hold = g.standard_exponential((n, K)) / rate
    steps = np.where(g.integers(0, 2, size=(n, K - 1)) == 0, 1, -1).astype(np.int64)
    grid = np.linspace(0.0, t, 4097)
    return hold, steps, t, grid**2 / 2, grid[1] - grid[0]


CASES = {
    "loop_sums": (kernels.loop_sums_numpy, kernels.loop_sums_numba, _loop_inputs),
    "transfer_path_sums": (kernels.transfer_path_sums_numpy, kernels.transfer_path_sums_numba, _transfer_inputs),
    "walk_log_weights": (kernels.walk_log_weights_numpy, kernels.walk_log_weights_numba, _walk_inputs),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not installed; only the numpy kernels can be timed")
    print(f"{'kernel':<20} {'numpy [ms]':>12} {'numba [ms]':>12} {'speed-up':>9} {'max |diff|':>11}")
    for name, (f_np, f_nb, make) in CASES.items():
        inputs = make()
        a = f_np(*inputs)
        b = f_nb(*inputs)  # compiles on first call
        t_np = min(timeit.repeat(lambda: f_np(*inputs), number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(lambda: f_nb(*inputs), number=1, repeat=args.repeat)) * 1e3
        diff = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
        print(f"{name:<20} {t_np:12.2f} {t_nb:12.2f} {t_np / t_nb:9.2f} {diff:11.3g}")


if __name__ == "__main__":
    main()
