"""Benchmark the compiled log-density kernel against the numpy fallback.

The kernel evaluates the (n, T) matrix of censored-beta log-likelihood
contributions — the hot loop inside every mixture likelihood/gradient
evaluation. Run:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from xbxreg.kernels import _ref
from xbxreg.quad import gauss_laguerre

try:
    from xbxreg.kernels import _xbkernel
except ImportError:
    _xbkernel = None


def make_problem(n, T, seed=0):
    rng = np.random.default_rng(seed)
    y = rng.uniform(size=n)
    y[rng.uniform(size=n) < 0.15] = 0.0
    y[rng.uniform(size=n) < 0.05] = 1.0
    mu = rng.uniform(0.1, 0.9, size=n)
    phi = rng.uniform(0.5, 50.0, size=n)
    u = 0.1 * gauss_laguerre(T).nodes
    return y, mu, phi, u


def bench(fn, args, repeat=20):
    fn(*args)  # warm up
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    print(f"{'n':>6} {'T':>4} {'python (ms)':>12} {'compiled (ms)':>14} {'speedup':>8}")
    for n in (100, 500, 2000, 10000):
        for T in (20, 50):
            args = make_problem(n, T)
            t_py = bench(_ref.xb_loglik_grid, args)
            if _xbkernel is None:
                print(f"{n:>6} {T:>4} {t_py * 1e3:>12.3f} {'n/a':>14} {'n/a':>8}")
                continue
            t_cy = bench(_xbkernel.xb_loglik_grid, args)
            a = _ref.xb_loglik_grid(*args)
            b = _xbkernel.xb_loglik_grid(*args)
            assert np.allclose(a, b, equal_nan=True), "backends disagree"
            print(f"{n:>6} {T:>4} {t_py * 1e3:>12.3f} {t_cy * 1e3:>14.3f} "
                  f"{t_py / t_cy:>7.2f}x")


if __name__ == "__main__":
    main()
