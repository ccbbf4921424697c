"""Time the compiled DP kernel against the NumPy fallback.

    python benchmarks/bench_dp.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from osaas_plan.knapsack import DpTable, KnapsackInstance, KnapsackItem, available_kernels

SIZES = [  # (items, bins, transceivers)
    (6, 32, 4),
    (12, 48, 8),
    (24, 96, 16),
    (48, 192, 32),
    (96, 384, 64),
]


def make_instance(n_items, bins, trx, seed=0):
    rng = np.random.default_rng(seed)
    items = tuple(
        KnapsackItem(f"s{i:03d}", float(rng.integers(100, 800)), int(rng.integers(4, 16)))
        for i in range(n_items)
    )
    return KnapsackInstance(items, bins, trx)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    kernels = available_kernels()
    print(f"{'items':>5} {'bins':>5} {'trx':>4} " + " ".join(f"{k + ' ms':>12}" for k in kernels) + "  speedup")
    for n, b, t in SIZES:
        inst = make_instance(n, b, t)
        ref = DpTable(inst, "python").layers
        times = {}
        for k in kernels:
            assert np.array_equal(DpTable(inst, k).layers, ref)
            times[k] = min(timeit.repeat(lambda: DpTable(inst, k), number=1, repeat=args.repeat)) * 1e3
        speed = f"{times['python'] / times['cython']:8.1f}x" if "cython" in times else "       -"
        print(f"{n:>5} {b:>5} {t:>4} " + " ".join(f"{times[k]:12.3f}" for k in kernels) + "  " + speed)


if __name__ == "__main__":
    main()
