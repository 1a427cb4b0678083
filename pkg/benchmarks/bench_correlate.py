"""Benchmark the compiled vs numpy coincidence-counting backends.

Generates Poisson click streams of increasing size and times the
all-pairs histogram on each backend, checking that both agree bin for
bin.  Run:  python benchmarks/bench_correlate.py
"""
import time

import numpy as np

from cqedkit import kernels


def timed(backend, a, b, window, bin_width, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        counts = kernels.pair_histogram(a, b, window, bin_width,
                                        exclude_self=True, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, counts


def main():
    rng = np.random.default_rng(0)
    backends = ["numpy"]
    if kernels.BACKEND == "compiled":
        backends.insert(0, "compiled")
    else:
        print("compiled extension not built; timing numpy backend only")

    print(f"{'clicks':>10} {'pairs/bin':>10}", *(f"{b:>12}" for b in backends))
    for n in (10_000, 50_000, 200_000, 500_000):
        rate = 1e-4  # clicks per ps
        times = np.sort(rng.uniform(0.0, n / rate, n))
        window, bin_width = 84_500.0, 130.0
        results = {}
        row = []
        for backend in backends:
            dt, counts = timed(backend, times, times, window, bin_width)
            results[backend] = counts
            row.append(f"{dt * 1e3:10.1f}ms")
        if len(backends) == 2 and not np.array_equal(results["compiled"],
                                                     results["numpy"]):
            raise SystemExit("backend mismatch!")
        mean_bin = int(results[backends[0]].mean())
        print(f"{n:>10} {mean_bin:>10}", *row)
    if len(backends) == 2:
        print("backends agree bin-for-bin on all sizes")


if __name__ == "__main__":
    main()
