"""Compiled vs numpy kernels: wall time of Perm and Haf on random complex matrices.

    python3 benchmarks/bench_kernels.py [--sizes 8 12 16 20] [--repeat 3]

Prints the best of ``--repeat`` runs per backend and the speedup.  Rows for
the compiled backend are skipped if the extension was not built.
"""

import argparse
import time

import numpy as np

from pairgraph import _backend
from pairgraph.matrix import hafnian, hafnian_inclusion_exclusion, permanent_ryser

KERNELS = {
    "perm": permanent_ryser,
    "haf": hafnian,
    "haf-ie": hafnian_inclusion_exclusion,
}


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 12, 16, 20])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = _backend.available()
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<7} {'n':>3} " + " ".join(f"{b:>10}" for b in backends) + ("    speedup" if len(backends) > 1 else ""))
    for n in args.sizes:
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        s = (a + a.T) / 2
        for name, fn in KERNELS.items():
            m = a if name == "perm" else s
            times = [best_time(lambda: fn(m, b), args.repeat) for b in backends]
            row = f"{name:<7} {n:>3} " + " ".join(f"{t:>9.4f}s" for t in times)
            if len(times) > 1:
                row += f"  {times[1] / times[0]:>8.1f}x"
            print(row)


if __name__ == "__main__":
    main()
