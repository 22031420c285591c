"""Compare the numba and numpy kernels on representative sizes.

    python benchmarks/bench_kernels.py [--quick] [--threads N]

Reports best-of-repeats wall time per kernel and the max abs difference
between the two backends.
"""

import argparse
import time

import numpy as np

from g2speckle import _backend, kernels
from g2speckle.analysis.grid import AngularGrid


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="small sizes only")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()
    if kernels.phase_sums_numba is None:
        raise SystemExit("numba backend disabled (G2SPECKLE_DISABLE_NUMBA set or numba missing)")
    _backend.set_threads(args.threads)
    rng = np.random.Generator(np.random.Philox(0))

    cases = []
    grids = [(45, 90), (90, 180)] if args.quick else [(90, 180), (180, 360), (360, 720)]
    for n in (100,) if args.quick else (100, 400):
        for g in grids:
            pos = rng.uniform(-3 * np.pi, 3 * np.pi, (n, 3))
            kv = AngularGrid(*g).points - np.array([0.0, 0.0, 1.0])
            cases.append((f"phase_sums N={n} grid={g[0]}x{g[1]} orders=2", pos, kv))
    big = rng.uniform(-100, 100, (kernels.PAIRWISE_THRESHOLD * 5, 3))
    cases.append((f"phase_sums N={big.shape[0]} (pairwise) 256 dirs", big, rng.standard_normal((256, 3))))

    print(f"numba threads: {_backend.get_threads()}")
    print(f"{'kernel':55s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s} {'max|diff|':>10s}")
    for name, pos, kv in cases:
        kernels.phase_sums_numba(pos[:2], kv[:2], 2)  # compile outside the timing
        tn, a = best_of(lambda: kernels.phase_sums_numba(pos, kv, 2), args.repeats)
        tp, b = best_of(lambda: kernels.phase_sums_numpy(pos, kv, 2), args.repeats)
        print(f"{name:55s} {tn:10.4f} {tp:10.4f} {tp / tn:8.2f} {np.max(np.abs(a - b)):10.2e}")

    for n, m in ((8, 2), (6, 3)) if not args.quick else ((6, 2),):
        z = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
        kernels.correlation_sum_numba(z, m, 0.1, -0.2)
        tn, a = best_of(lambda: kernels.correlation_sum_numba(z, m, 0.1, -0.2), args.repeats)
        tp, b = best_of(lambda: kernels.correlation_sum_numpy(z, m, 0.1, -0.2), args.repeats)
        print(f"{f'correlation_sum N={n} m={m}':55s} {tn:10.4f} {tp:10.4f} {tp / tn:8.2f} {abs(a - b):10.2e}")


if __name__ == "__main__":
    main()
