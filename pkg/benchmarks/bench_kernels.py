"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import timeit

import numpy as np

from willmore_fb import kernels


def _cases(rng: np.random.Generator) -> dict:
    n = 257 * 129
    vecs = [rng.normal(size=(n, 3)) for _ in range(5)]
    x = np.linspace(-np.pi, np.pi, 4097)
    xq = np.linspace(-np.pi, np.pi, 2049)
    wq = np.full(xq.size, 2 * np.pi / xq.size)
    vals = np.cos(xq)
    u = rng.normal(size=(257, 513))
    return {
        "fundamental_forms": lambda: kernels.fundamental_forms(*vecs),
        "poisson_kernel": lambda: kernels.poisson_kernel(x, 0.3),
        "poisson_convolve": lambda: kernels.poisson_convolve(vals, xq, wq, x[::8], 0.3),
        "bilaplacian13": lambda: kernels.bilaplacian13(u, 0.01, 0.01),
    }


def run(repeat: int = 5, seed: int = 0) -> dict:
    results: dict = {}
    for backend in kernels.available_backends():
        previous = kernels.use_backend(backend)
        try:
            for name, fn in _cases(np.random.default_rng(seed)).items():
                fn()  # warm up
                best = min(timeit.repeat(fn, number=1, repeat=repeat))
                results.setdefault(name, {})[backend] = best
        finally:
            kernels.use_backend(previous)
    return results


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json")
    args = ap.parse_args()
    results = run(args.repeat, args.seed)
    print(f"{'kernel':<20}{'python [ms]':>14}{'cython [ms]':>14}{'speed-up':>10}")
    for name, t in results.items():
        py, cy = t.get("python"), t.get("cython")
        ratio = f"{py / cy:9.1f}x" if py and cy else "      n/a"
        cy_s = f"{1e3 * cy:14.3f}" if cy else f"{'n/a':>14}"
        print(f"{name:<20}{1e3 * py:14.3f}{cy_s}{ratio}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
