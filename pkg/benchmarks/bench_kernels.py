"""Compare the numba kernels against their pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Also checks that both paths agree.  Set ENTROPY_RIGIDITY_PURE_NUMPY=1 to see
the package run without numba at all (HAVE_NUMBA is then False).
"""
import argparse
import time

import numpy as np

from entropy_rigidity import _kernels as K


def polygon(center, radius, n):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return np.stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)], axis=1)


def best_of(f, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = f()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print("numba available: %s" % K.HAVE_NUMBA)

    P, Q = polygon((0, 0), 1.0, 2048), polygon((3.0, 0.5), 1.0, 2048)
    rng = np.random.default_rng(0)
    M = rng.random((4, 4))
    M /= M.sum(axis=1, keepdims=True)
    pi = np.linalg.matrix_power(M.T, 200) @ np.full(4, 0.25)
    W = rng.integers(0, 3, size=(4, 4))
    cases = [
        ("polygon distance (2048-gons)", lambda nb: K.convex_polygon_distance(P, Q, use_numba=nb)),
        ("Birkhoff sum law (N=512)", lambda nb: K.birkhoff_sum_distribution(M, pi, W, 512, use_numba=nb)),
    ]
    for name, f in cases:
        if K.HAVE_NUMBA:
            f(True)  # compile
        t_np, out_np = best_of(lambda: f(False), args.repeat)
        if K.HAVE_NUMBA:
            t_nb, out_nb = best_of(lambda: f(True), args.repeat)
            err = float(np.max(np.abs(np.asarray(out_np) - np.asarray(out_nb))))
            print("%-30s numpy %8.2f ms  numba %8.2f ms  speedup %6.1fx  max diff %.2e"
                  % (name, 1e3 * t_np, 1e3 * t_nb, t_np / t_nb, err))
        else:
            print("%-30s numpy %8.2f ms" % (name, 1e3 * t_np))


if __name__ == "__main__":
    main()
