"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--pairs 2000] [--horizon 10000] [--repeat 3]

Prints ns per pair-step for each (system, metric) case and the speedup, and
checks that both backends return identical extrema.
"""
import argparse
import time

import numpy as np

from liyorke import kernels
from liyorke import metrics as M
from liyorke.systems import (
    RngStream,
    doubling_map,
    irrational_rotation,
    periodic_hybrid,
    product_with_finite_rotation,
    sample_batch,
    system_program,
)

CASES = [
    (doubling_map(), M.circle_arc()),
    (irrational_rotation(), M.circle_arc()),
    (irrational_rotation(), M.spillover_cells()),
    (product_with_finite_rotation(doubling_map(), 2), M.sum_product(M.circle_arc())),
    (periodic_hybrid(0.5), M.pullback_monotone()),
]


def best_of(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--pairs", type=int, default=2000)
    ap.add_argument("--horizon", type=int, default=10_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    names = kernels.available_backends()
    backends = {n: kernels.load_backend(n) for n in names}
    steps = args.pairs * args.horizon
    print(f"backends: {', '.join(names)}; {args.pairs} pairs x {args.horizon} steps")
    print(f"{'system':<20}{'metric':<14}" + "".join(f"{n + ' ns/step':>18}" for n in names)
          + ("   speedup" if len(names) > 1 else ""))
    for system, metric in CASES:
        gen = RngStream(0).generator()
        P = sample_batch(system, gen, args.pairs, args.horizon)
        Q = sample_batch(system, gen, args.pairs, args.horizon)
        sp, prog = system_program(system), M.lower_metric(metric)
        times, results = {}, {}
        for n, b in backends.items():
            times[n], results[n] = best_of(
                lambda: b.pair_extrema(P, Q, sp, prog, args.horizon // 2, args.horizon),
                args.repeat)
        if len(names) > 1:
            for a, b in zip(results["cython"], results["python"]):
                assert np.array_equal(a, b), "backends disagree"
        row = f"{system.name:<20}{metric.name:<14}" + "".join(
            f"{1e9 * times[n] / (steps / 2):>18.1f}" for n in names)
        if len(names) > 1:
            row += f"{times['python'] / times['cython']:>10.1f}x"
        print(row)


if __name__ == "__main__":
    main()
