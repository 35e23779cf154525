"""Time the numba and pure-numpy covering-search kernels.

    python benchmarks/bench_kernels.py [--size 512] [--repeat 5]
"""
import argparse
import time

import numpy as np

from tetrolet_iqa import _kernels
from tetrolet_iqa.tiling import slot_table


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    blocks = rng.uniform(0, 255, size=((args.size // 4) ** 2, 16))
    slots = slot_table()
    backends = {"numpy": (_kernels.analyze_numpy, _kernels.synthesize_numpy)}
    if _kernels.numba_available():
        backends["numba"] = (_kernels.analyze_numba, _kernels.synthesize_numba)

    results = {}
    for name, (analyze, synthesize) in backends.items():
        idx, coeffs = analyze(blocks, slots)  # warm-up / JIT compile
        synthesize(coeffs, idx, slots)
        results[name] = (idx, coeffs)
        t_a = best_of(lambda: analyze(blocks, slots), args.repeat)
        t_s = best_of(lambda: synthesize(coeffs, idx, slots), args.repeat)
        print(f"{name:>6}: analyze {t_a * 1e3:8.2f} ms   synthesize {t_s * 1e3:8.2f} ms   ({len(blocks)} blocks)")

    if len(results) == 2:
        (i0, c0), (i1, c1) = results.values()
        print(f"coverings identical: {np.array_equal(i0, i1)}, max coefficient diff {np.abs(c0 - c1).max():.2e}")


if __name__ == "__main__":
    main()
