"""Time the DP kernels: compiled core vs numpy fallback.

    python benchmarks/bench_kernels.py --items 40 --capacity 4096 --repeat 5
"""

import argparse
import timeit

import numpy as np

from hmsplace import _kernels_py, kernels

try:
    from hmsplace import _kernels as compiled
except ImportError:
    compiled = None


def cases(n_items, capacity, seed):
    rng = np.random.default_rng(seed)
    sizes = rng.integers(1, max(2, capacity // 4), n_items)
    weights = rng.uniform(-1.0, 10.0, n_items)
    return sizes, weights


def best_time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--items", type=int, nargs="+", default=[10, 40, 160])
    ap.add_argument("--capacity", type=int, nargs="+", default=[256, 1024, 4096])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    impls = [("numpy", _kernels_py)]
    if compiled is not None:
        impls.insert(0, ("cython", compiled))
    else:
        print("compiled core not built; timing the numpy fallback only")
    print(f"default backend: {kernels.BACKEND}")
    print(f"{'kernel':<12}{'items':>6}{'cap':>7}" + "".join(f"{n + ' ms':>12}" for n, _ in impls)
          + ("     speedup" if len(impls) == 2 else ""))
    for n in args.items:
        for cap in args.capacity:
            sizes, weights = cases(n, cap, args.seed)
            rows = {
                "knapsack": lambda impl: kernels.knapsack_suffix(sizes, weights, cap, impl=impl),
                "subset": lambda impl: kernels.subset_min_count(sizes, cap, impl=impl),
            }
            for name, call in rows.items():
                ms = [best_time(lambda: call(impl), args.repeat) * 1e3 for _, impl in impls]
                line = f"{name:<12}{n:>6}{cap:>7}" + "".join(f"{t:>12.3f}" for t in ms)
                if len(ms) == 2:
                    line += f"{ms[1] / ms[0]:>11.1f}x"
                print(line)


if __name__ == "__main__":
    main()
