"""Compare the compiled and numpy trial kernels.

    python3 benchmarks/bench_kernels.py [--runs 20000] [--repeat 5]

Reports the best-of-``repeat`` time per backend for one sweep cell at each
ensemble size, the speedup, and the largest difference between the two
backends' estimates.
"""

import argparse
import time

import numpy as np

from weakgauss import kernels
from weakgauss.rng import derive_key


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if kernels.compiled_simulate_block is None:
        raise SystemExit("compiled kernel not built; run `pip install -e . --no-build-isolation`")
    backends = {"python": kernels.python_simulate_block, "cython": kernels.compiled_simulate_block}

    print(f"{'n':>4} {'python s':>10} {'cython s':>10} {'speedup':>8} {'max |diff|':>11}")
    for n in (6, 8, 10, 20):
        key = derive_key(1, n)
        call = {
            name: (lambda f=f: f(key, 0, args.runs, 0.3, -1.2, 0.9, 0.6, n, 0.8))
            for name, f in backends.items()
        }
        tp, a = best_time(call["python"], args.repeat)
        tc, b = best_time(call["cython"], args.repeat)
        print(f"{n:>4} {tp:>10.4f} {tc:>10.4f} {tp / tc:>8.2f} {np.max(np.abs(a - b)):>11.2e}")


if __name__ == "__main__":
    main()
