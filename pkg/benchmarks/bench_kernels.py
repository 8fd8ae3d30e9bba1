"""Time the compiled and the NumPy kernels on the same inputs and check they agree.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--json PATH]
"""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from renewalkit import kernels


def _cases(rng):
    prev = rng.random((401, 401))
    prev /= prev.sum()
    offsets = np.array([[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]])
    weights = np.full(5, 0.2)
    a = rng.random((121, 121))
    b = rng.random((15, 15))
    paths = np.cumsum(rng.standard_normal((4000, 65, 2)), axis=1)
    lo = rng.uniform(-8, 8, (64, 2))
    hi = lo + 1.0
    return {
        "scatter_convolve 401^2 x 5 atoms": lambda: kernels.scatter_convolve(prev, offsets, weights),
        "dense_convolve 121^2 * 15^2": lambda: kernels.dense_convolve(a, b),
        "count_hits 4000 paths x 64 steps x 64 boxes": lambda: kernels.count_hits(paths, lo, hi, 1, 65),
    }


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    results = []
    cases = _cases(np.random.default_rng(0))
    for name, fn in cases.items():
        row = {"case": name}
        outs = {}
        for be in backends:
            prev = kernels.use_backend(be)
            try:
                row[be], outs[be] = _time(fn, args.repeat)
            finally:
                kernels.use_backend(prev)
        if len(outs) == 2:
            x, y = outs["cython"], outs["python"]
            row["max_abs_diff"] = float(np.max(np.abs(np.asarray(x, float) - np.asarray(y, float))))
            row["speedup"] = row["python"] / row["cython"]
        results.append(row)
        cols = "  ".join(f"{be}={row[be] * 1e3:9.2f} ms" for be in backends)
        extra = f"  speedup={row['speedup']:6.1f}x  max|diff|={row['max_abs_diff']:.1e}" if "speedup" in row else ""
        print(f"{name:45s} {cols}{extra}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"backends": list(backends), "results": results}, fh, indent=2)


if __name__ == "__main__":
    main()
