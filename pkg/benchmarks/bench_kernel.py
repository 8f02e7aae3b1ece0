#!/usr/bin/env python3
"""Benchmark the compiled generation kernel against the pure-Python twin.

The two backends are bit-identical by construction; this script measures
the speed gap on the correlated host generator, which dominates runtime
for large populations.

Run from an installed environment:

    python benchmarks/bench_kernel.py --count 200000
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hostforge import _kernel_py
from hostforge.model import default_params, parse_when
from hostforge.sampler import _prepare

try:
    from hostforge import _kernel
except ImportError:
    _kernel = None


def bench(fill, args, n: int, repeats: int) -> float:
    outs = (
        np.zeros(n, np.int64), np.zeros(n, np.int64), np.zeros(n, np.int64),
        np.zeros(n), np.zeros(n), np.zeros(n),
    )
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fill(*args, *outs)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=100_000)
    parser.add_argument("--date", default="2010-09-01")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--repeats", type=int, default=3)
    opts = parser.parse_args()

    params = default_params()
    t = parse_when(opts.date)
    ctx = _prepare(params, t)
    args = (
        opts.seed, 0, opts.count,
        ctx.core_levels, ctx.core_cdf, ctx.core_last,
        ctx.mem_levels, ctx.mem_cdf, ctx.mem_last,
        *ctx.low, *ctx.scale, *ctx.whet_q, *ctx.dhry_q,
        ctx.disk_mu, ctx.disk_sigma,
    )

    py = bench(_kernel_py.fill_correlated, args, opts.count, max(1, opts.repeats // 3))
    print(f"pure python : {opts.count} hosts in {py:.3f}s  ({opts.count / py:,.0f} hosts/s)")

    if _kernel is None:
        print("compiled    : not built (install with a C toolchain to compare)")
        return 0

    cy = bench(_kernel.fill_correlated, args, opts.count, opts.repeats)
    print(f"compiled    : {opts.count} hosts in {cy:.3f}s  ({opts.count / cy:,.0f} hosts/s)")
    print(f"speedup     : {py / cy:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
