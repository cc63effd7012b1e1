"""Time the rasterization kernels on the seed corpus.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time
from importlib import resources

import numpy as np

from metisforge import kernels
from metisforge.digits.path import load_seed_corpus
from metisforge.digits.raster import rasterize


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    with resources.as_file(resources.files("metisforge").joinpath("data/seeds")) as d:
        corpus = load_seed_corpus(d)
    models = [r.model for r in corpus]
    grids = {}
    for name in sorted(kernels.backends()):
        best = float("inf")
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            out = [rasterize(m, name) for m in models]
            best = min(best, time.perf_counter() - t0)
        grids[name] = np.stack(out)
        print(f"{name:>7}: {1e3 * best / len(models):8.3f} ms per digit (best of {args.repeat}, {len(models)} digits)")
    if len(grids) == 2:
        same = np.array_equal(grids["cython"], grids["python"])
        print(f"outputs identical: {same}")
    else:
        print("compiled kernel not built; only the Python fallback was timed")


if __name__ == "__main__":
    main()
