"""Timing comparison of the two kernel backends.

Runs each hot kernel on the same inputs through the numba twin and the
pure-numpy twin and prints per-call wall times with the speedup. The
numba functions are called once before timing so compilation (or the
on-disk cache load) stays out of the numbers.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--scale S]
"""

import argparse
import time

import numpy as np

from jdot import _numpy_kernels as npk

try:
    from jdot import _numba_kernels as nbk
except ImportError:
    nbk = None


def timed(fn, *args, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(name, fn_np, fn_nb, args, repeat):
    t_np, out_np = timed(fn_np, *args, repeat=repeat)
    if fn_nb is None:
        print(f"{name:<28} numpy {t_np * 1e3:9.2f} ms   numba unavailable")
        return
    fn_nb(*args)  # warm the jit cache
    t_nb, out_nb = timed(fn_nb, *args, repeat=repeat)
    first_np = out_np[0] if isinstance(out_np, tuple) else out_np
    first_nb = out_nb[0] if isinstance(out_nb, tuple) else out_nb
    agree = np.allclose(first_np, first_nb, rtol=1e-9, atol=1e-12)
    print(
        f"{name:<28} numpy {t_np * 1e3:9.2f} ms   numba "
        f"{t_nb * 1e3:9.2f} ms   x{t_np / t_nb:6.1f}"
        f"{'' if agree else '   RESULTS DIFFER'}"
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument(
        "--scale", type=float, default=1.0, help="problem size multiplier"
    )
    args = parser.parse_args()
    s = args.scale
    g = np.random.default_rng(0)

    n_pts = int(400 * s)
    X = g.normal(size=(n_pts, 8))
    Y = g.normal(size=(n_pts, 8))

    n_ot = int(150 * s)
    C = g.uniform(0.0, 1.0, size=(n_ot, n_ot))
    a = np.full(n_ot, 1.0 / n_ot)
    b = np.full(n_ot, 1.0 / n_ot)
    budget = np.int64(50 * (2 * n_ot) ** 2 + 5000)

    n_fit = int(120 * s)
    Xf = g.normal(size=(n_fit, 2))
    D = npk.sqdist_matrix(Xf, Xf)
    K = np.exp(-0.5 * D)
    P = g.uniform(0.01, 1.0, size=(n_fit, 3))
    P /= P.sum(axis=1, keepdims=True)
    A0 = np.zeros((n_fit, 3))
    b0 = np.zeros(3)

    fn_nb = (lambda name: getattr(nbk, name)) if nbk is not None else (
        lambda name: None
    )
    print(
        f"sizes: distances {n_pts}x{n_pts}, transport {n_ot}x{n_ot}, "
        f"hinge fit n={n_fit}, best of {args.repeat}"
    )
    bench(
        "sqdist_matrix",
        npk.sqdist_matrix,
        fn_nb("sqdist_matrix"),
        (X, Y),
        args.repeat,
    )
    bench(
        "transport_simplex",
        npk.solve_uniform_transport,
        fn_nb("solve_uniform_transport"),
        (C, budget),
        args.repeat,
    )
    bench(
        "sinkhorn_log (eps 0.05)",
        npk.sinkhorn_log,
        fn_nb("sinkhorn_log"),
        (C, a, b, 0.05, 1e-8, np.int64(20000)),
        args.repeat,
    )
    bench(
        "hinge_descent",
        npk.hinge_descent,
        fn_nb("hinge_descent"),
        (K, P, 0.05, 1e-6, np.int64(5000), A0, b0, False),
        args.repeat,
    )


if __name__ == "__main__":
    main()
