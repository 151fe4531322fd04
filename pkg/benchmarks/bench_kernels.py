#!/usr/bin/env python3
"""Compare the compiled kernels against the pure-Python fallback.

Times the two hot paths at realistic sizes:

* rolling CoES tensor, 1460 x 25 panel with a 250-day window
  (1211 windows, the paper-scale configuration), and
* the two-segment breakpoint scan on transformed-similarity gap
  vectors (m = 299 gaps, trimmed search range), which the network
  stage runs twice per date.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from tailnet._kernels import _fallback

try:
    from tailnet._kernels import _core
except ImportError:
    _core = None


def time_call(fn, *args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_rolling(repeats):
    rng = np.random.default_rng(0)
    returns = rng.standard_normal((1460, 25)) * 0.03
    rows = []
    py = time_call(_fallback.rolling_coes_kernel, returns, 250, 13, repeats=repeats)
    rows.append(("rolling_coes 1460x25 W=250", py, None))
    if _core is not None:
        cy = time_call(_core.rolling_coes_kernel, returns, 250, 13, repeats=repeats)
        rows[-1] = (rows[-1][0], py, cy)
        out_py = _fallback.rolling_coes_kernel(returns, 250, 13)
        out_cy = _core.rolling_coes_kernel(returns, 250, 13)
        assert np.allclose(out_py[0], out_cy[0], rtol=1e-12)
        assert np.array_equal(out_py[1], out_cy[1])
    return rows


def bench_breakpoint(repeats):
    rng = np.random.default_rng(1)
    gap_sets = [np.abs(np.diff(np.sort(rng.random(300)))) for _ in range(40)]
    lo, hi = 30, 269  # theta_bar = 0.1 on m = 299

    def run(impl):
        for gaps in gap_sets:
            impl.breakpoint_scan(gaps, lo, hi)

    rows = []
    py = time_call(run, _fallback, repeats=repeats)
    rows.append(("breakpoint_scan 40 x m=299", py, None))
    if _core is not None:
        cy = time_call(run, _core, repeats=repeats)
        rows[-1] = (rows[-1][0], py, cy)
        for gaps in gap_sets[:5]:
            assert _core.breakpoint_scan(gaps, lo, hi) == _fallback.breakpoint_scan(
                gaps, lo, hi
            )
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if _core is None:
        print("compiled extension not available; timing the fallback only\n")
    rows = bench_rolling(args.repeats) + bench_breakpoint(args.repeats)
    width = max(len(r[0]) for r in rows)
    header = f"{'kernel':<{width}}  {'python':>10}  {'cython':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, py, cy in rows:
        if cy is None:
            print(f"{name:<{width}}  {py * 1e3:>8.1f}ms  {'-':>10}  {'-':>8}")
        else:
            print(f"{name:<{width}}  {py * 1e3:>8.1f}ms  {cy * 1e3:>8.1f}ms  {py / cy:>7.1f}x")


if __name__ == "__main__":
    main()
