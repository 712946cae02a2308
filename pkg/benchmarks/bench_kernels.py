"""Time the compiled and pure-Python kernels on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 3] [--sizes 200 500 1000]
"""

import argparse
import time

import numpy as np

from workload_lab import kernels


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 500, 1000, 2000])
    ap.add_argument("--dims", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = kernels.available()
    print(f"backends: {', '.join(backends)} (default {kernels.BACKEND})")
    print(f"{'kernel':<20}{'n':>7}" + "".join(f"{b + ' s':>12}" for b in backends) + f"{'speedup':>10}  same")
    rng = np.random.default_rng(args.seed)
    for n in args.sizes:
        x = rng.random((n, args.dims))
        w = rng.integers(1, 5, size=n).astype(float)
        labels = rng.integers(0, 6, size=n)
        binned = np.floor(x * 16)
        cases = {
            "centroid_linkage": lambda b: kernels.centroid_linkage(x * w[:, None], w, backend=b),
            "sums euclidean": lambda b: kernels.dissimilarity_sums(x, labels, 6, 0, backend=b),
            "sums hamming": lambda b: kernels.dissimilarity_sums(binned, labels, 6, 1, backend=b),
        }
        for name, fn in cases.items():
            results = {b: best_of(lambda: fn(b), args.repeat) for b in backends}
            cols = "".join(f"{results[b][0]:>12.4f}" for b in backends)
            speed = results["python"][0] / results["cython"][0] if "cython" in results else 1.0
            outs = [results[b][1] for b in backends]
            if name == "centroid_linkage":
                same = all(np.array_equal(o[0], outs[0][0]) and np.array_equal(o[1], outs[0][1]) for o in outs)
            else:
                same = all(np.allclose(o, outs[0], rtol=1e-12, atol=1e-12) for o in outs)
            print(f"{name:<20}{n:>7}{cols}{speed:>9.1f}x  {same}")


if __name__ == "__main__":
    main()
