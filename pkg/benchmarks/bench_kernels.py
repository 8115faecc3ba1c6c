"""Time every hot kernel under the numba and numpy backends on identical inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

Numba timings exclude the first (compiling) call. Results from the two
backends are also compared, so a speedup never hides a wrong answer.
"""
import argparse
import timeit

import numpy as np

from fuzzybic import kernels
from fuzzybic._accel import HAVE_NUMBA


def cases(rng):
    col = rng.random(569)
    sub = np.round(rng.random((120, 30)), 3)
    return {
        "cross_relation 212x357": lambda b: kernels.cross_relation(col[:212], col[212:], 0.26, backend=b),
        "cluster_labels_1d n=569": lambda b: kernels.cluster_labels_1d(col, 0.005, backend=b),
        "column_entropies 120x30": lambda b: kernels.column_entropies(sub, 0.01, backend=b),
        "row_deletion_entropies 120x30": lambda b: kernels.row_deletion_entropies(sub, 0.01, backend=b),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=20)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s}" + "".join(f"{b + ' (ms)':>14s}" for b in backends) + f"{'speedup':>10s}")
    for name, fn in cases(rng).items():
        outs = {b: fn(b) for b in backends}  # warm-up, compiles numba
        for b in backends[1:]:
            np.testing.assert_allclose(outs[b], outs["numpy"], atol=1e-12)
        ms = {}
        for b in backends:
            best = min(timeit.repeat(lambda: fn(b), number=args.number, repeat=args.repeat))
            ms[b] = 1e3 * best / args.number
        row = f"{name:32s}" + "".join(f"{ms[b]:14.3f}" for b in backends)
        if "numba" in ms:
            row += f"{ms['numpy'] / ms['numba']:9.1f}x"
        print(row)
    if not HAVE_NUMBA:
        print("numba unavailable or disabled: only the numpy path was timed")


if __name__ == "__main__":
    main()
