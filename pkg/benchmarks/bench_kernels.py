"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--quick] [--repeat R]

Outputs of both backends are compared before timing.
"""

from __future__ import annotations

import argparse
import sys
import timeit

import numpy as np

from revpref import _kernels_py
from revpref.kernels import available_backends


def cases(quick: bool):
    rng = np.random.default_rng(0)
    fw_sizes = (8, 32) if quick else (8, 32, 128, 256)
    for n in fw_sizes:
        a = rng.random((n, n))  # no negative cycle: full run, no early stop
        np.fill_diagonal(a, 0.0)
        yield "floyd_warshall", n, (a, 1e-9)
    for n in fw_sizes:
        yield "transitive_closure", n, (rng.random((n, n)) < 3.0 / n,)
    for n in (8, 32) if quick else (8, 64, 256):
        yield "hungarian", n, (rng.normal(size=(n, n)),)
    for n in (6, 7) if quick else (7, 8, 9):
        yield "brute_force_assignment", n, (rng.normal(size=(n, n)),)


def same(x, y) -> bool:
    if isinstance(x, tuple):
        return all(same(a, b) for a, b in zip(x, y))
    if isinstance(x, np.ndarray):
        return np.array_equal(x, y)
    return x == y


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="small sizes only")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; timing the fallback only")
    names = sorted(backends)
    print(f"{'kernel':<24}{'n':>5}" + "".join(f"{b + ' ms':>14}" for b in names) + f"{'speedup':>10}")
    for kernel, n, call_args in cases(args.quick):
        ref = getattr(_kernels_py, kernel)(*call_args)
        times = {}
        for b in names:
            fn = getattr(backends[b], kernel)
            out = fn(*call_args)
            if not same(ref, out):
                print(f"backend mismatch in {kernel} at n={n}", file=sys.stderr)
                return 1
            timer = timeit.Timer(lambda: fn(*call_args))
            loops, _ = timer.autorange()
            times[b] = min(timer.repeat(args.repeat, loops)) / loops * 1e3
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{kernel:<24}{n:>5}" + "".join(f"{times[b]:>14.4f}" for b in names) + f"{speed:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
