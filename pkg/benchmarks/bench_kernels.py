"""Compiled vs pure-Python kernels on the hot paths of a typical run.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from ou_selfnorm import kernels


def cases():
    g = np.random.default_rng(0)
    n, L, rows = 1000, 2719, 200
    times = np.asarray(kernels.harmonic_offsets(n, L))
    values = np.cumsum(g.normal(size=(rows, len(times))), axis=1) / 50
    x = g.normal(size=(rows, L))
    a = np.sort(g.normal(size=4000))
    b = np.sort(g.normal(size=4000))
    return {
        "harmonic_offsets n=1000 L=2.7e4": lambda m: m.harmonic_offsets(n, 10 * L),
        "selfnorm_rows 200x2719": lambda m: m.selfnorm_rows(x),
        "interp_rows 200 paths": lambda m: m.interp_rows(times, values, 0.5),
        "pl_extremum_rows max": lambda m: m.pl_extremum_rows(times, values, 0.0, 1.0, True),
        "pl_integral_rows absolute": lambda m: m.pl_integral_rows(times, values, 0.0, 1.0, kernels.ABSOLUTE),
        "pl_integral_rows square": lambda m: m.pl_integral_rows(times, values, 0.0, 1.0, kernels.SQUARE),
        "ks_sorted 4000 vs 4000": lambda m: m.ks_sorted(a, b),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    mods = kernels.backends()
    names = sorted(mods, key=lambda n: n != "python")  # python first, compiled second
    print(f"{'kernel':<34}" + "".join(f"{n + ' ms':>14}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for label, fn in cases().items():
        ms = [min(timeit.repeat(lambda: fn(mods[n]), number=1, repeat=args.repeat)) * 1e3 for n in names]
        row = f"{label:<34}" + "".join(f"{t:14.3f}" for t in ms)
        if len(ms) > 1:
            row += f"   {ms[0] / ms[1]:7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
