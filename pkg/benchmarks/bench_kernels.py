"""Compare the compiled and numpy kernels on the hot paths.

    python benchmarks/bench_kernels.py [--depth 14] [--repeat 20]

Prints one line per kernel with the best-of-N time for each backend and
the max absolute difference between their outputs.
"""

import argparse
import timeit

import numpy as np

from dyadic_sharp import kernels
from dyadic_sharp.dyadic import StepFunction, level_means
from dyadic_sharp.haar import dyadic_hilbert_spec
from dyadic_sharp.rearrangement import oscillation_by_level


def cases(depth, rng):
    n = 1 << depth
    cells = rng.standard_normal(n)
    coeffs = kernels.haar_forward(cells)
    spec = dyadic_hilbert_spec(depth)
    src, dst, amp = spec.src, spec.dst, spec.a
    sorted_blocks = np.sort(cells.reshape(-1, 16), axis=1)
    levels = [lv.copy() for lv in level_means(np.abs(cells))]
    osc = oscillation_by_level(StepFunction(depth, cells), 0.25)
    return {
        "haar_forward": lambda b: kernels.haar_forward(cells, backend=b),
        "haar_inverse": lambda b: kernels.haar_inverse(coeffs, backend=b),
        "scatter_shift": lambda b: kernels.scatter_shift(coeffs, src, dst, amp, backend=b),
        "block_oscillation": lambda b: kernels.block_oscillation(sorted_blocks, 12, backend=b),
        "maximal_chain(avg)": lambda b: kernels.maximal_chain(levels, backend=b),
        "maximal_chain(osc)": lambda b: kernels.maximal_chain(osc, backend=b),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depth", type=int, default=14)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"depth {args.depth}, backends {backends}, default {kernels.BACKEND}")
    if "cython" not in backends:
        print("compiled core not built; only the numpy path is timed")
    rng = np.random.default_rng(0)
    header = f"{'kernel':<20}" + "".join(f"{b + ' ms':>14}" for b in backends) + f"{'speedup':>10}{'max diff':>12}"
    print(header)
    for name, fn in cases(args.depth, rng).items():
        times, outs = {}, {}
        for b in backends:
            outs[b] = np.asarray(fn(b))
            times[b] = min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat)) * 1e3
        line = f"{name:<20}" + "".join(f"{times[b]:>14.3f}" for b in backends)
        if len(backends) == 2:
            diff = float(np.max(np.abs(outs["python"] - outs["cython"])))
            line += f"{times['python'] / times['cython']:>10.2f}{diff:>12.1e}"
        print(line)


if __name__ == "__main__":
    main()
