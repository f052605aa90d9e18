"""Compare the numba and numpy kernels on random symmetric tridiagonals.

    python3 benchmarks/bench_kernels.py [--sizes 3,8,32,64] [--repeat 200]

Prints one line per (kernel, size) with the mean time per call for each
backend and the speed-up.  The first numba call (compilation) is excluded.
"""

import argparse
import time

import numpy as np

from bdspectra._kernels import BACKENDS, gershgorin_bounds


def random_tridiag(rng, n):
    diag = rng.uniform(2.0, 6.0, n)
    off = rng.uniform(0.1, 1.5, n - 1)
    return diag, off


def per_call(fn, args, repeat):
    fn(*args)
    start = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - start) / repeat


def run(sizes, repeat, seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    for n in sizes:
        diag, off = random_tridiag(rng, n)
        lo, hi = gershgorin_bounds(diag, off)
        xs = np.linspace(lo, hi, 64)
        tol = 4.0 * np.finfo(np.float64).eps * max(abs(lo), abs(hi), 1.0)
        pivmin = np.finfo(np.float64).tiny * max(1.0, float(np.max(off * off, initial=0.0)))
        lam = float(np.mean(np.linalg.eigvalsh(np.diag(diag) + np.diag(off, 1) + np.diag(off, -1))))
        cases = {
            "bisect": (diag, off, tol),
            "sturm_count": (diag, off * off, xs, pivmin),
            "q_recursion": (diag, off, lam),
        }
        for kernel, args in cases.items():
            times = {name: per_call(impl[kernel], args, repeat) for name, impl in BACKENDS.items()}
            rows.append((kernel, n, times))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="3,8,32,64")
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]
    if "numba" not in BACKENDS:
        print("numba is not installed; only the numpy backend is available")
    for kernel, n, times in run(sizes, args.repeat):
        cells = "  ".join(f"{name}={t * 1e6:9.1f}us" for name, t in times.items())
        speed = ""
        if "numba" in times:
            speed = f"  speed-up x{times['numpy'] / times['numba']:.1f}"
        print(f"{kernel:12s} n={n:3d}  {cells}{speed}")


if __name__ == "__main__":
    main()
