"""Compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints the best time per call for each backend, the speedup, and the
largest difference between the two results.
"""
import argparse
import timeit

import numpy as np

from cdk import kernels
from cdk.problems import build_boolean_qp, random_bqp
from cdk.solvers import maximize_dual_on_Splus


def spd(n, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    return B @ B.T + n * np.eye(n)


def cases():
    out = []
    for n in (8, 32, 64):
        M = spd(n, n)
        out.append((f"jacobi_eigh n={n}", lambda M=M: kernels.jacobi_eigh(M), lambda r: r[0]))
        out.append((f"cholesky n={n}", lambda M=M: kernels.cholesky(M), lambda r: r))
    for n in (12, 16):
        rng = np.random.default_rng(n)
        Q = spd(n, n + 1)
        f = rng.standard_normal(n)
        out.append((f"brute_force_binary n={n}", lambda Q=Q, f=f: kernels.brute_force_binary(Q, f, False),
                    lambda r: r[1]))
    sweep = [build_boolean_qp(random_bqp(4 + s % 13, s, f_scale=4.0 + s % 13)) for s in range(10)]

    def bqp_sweep():
        vals = []
        for p in sweep:
            try:
                vals.append(maximize_dual_on_Splus(p).pi)
            except Exception:
                vals.append(np.nan)
        return np.array(vals)

    out.append(("interior solve, 10 BQP instances", bqp_sweep, lambda r: r))
    return out


def best_time(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 10**5:
        number *= 4
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    try:
        kernels.use_backend("cython")
    except ImportError:
        print("compiled extension not built; only the fallback is available")
        return 1
    print(f"{'kernel':36s} {'cython':>12s} {'python':>12s} {'speedup':>8s} {'max diff':>10s}")
    for name, fn, value in cases():
        row = {}
        for backend in ("cython", "python"):
            kernels.use_backend(backend)
            row[backend] = (best_time(fn, args.repeat), np.asarray(value(fn()), dtype=float))
        with np.errstate(invalid="ignore"):
            diff = np.nanmax(np.abs(row["cython"][1] - row["python"][1]))
        tc, tp = row["cython"][0], row["python"][0]
        print(f"{name:36s} {tc * 1e6:10.1f}us {tp * 1e6:10.1f}us {tp / tc:7.1f}x {diff:10.1e}")
    kernels.use_backend("cython")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
