"""Timing comparison of the compiled kernels against the numpy fallback.

Runs each hot kernel on realistic problem sizes with both backends,
checks the outputs agree, and prints a table of per-call times and the
speedup.  Usage::

    python3 benchmarks/bench_kernels.py [--repeats N]
"""
import argparse
import time

import numpy as np

from geoadapt._core import _fallback

try:
    from geoadapt._core import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_matern(repeats):
    rng = np.random.default_rng(0)
    u = rng.uniform(0.0, 2.0, size=4096 * 4096 // 8)
    rows = []
    for case, label in [(1, "kappa=0.5"), (3, "kappa=1.5"), (5, "kappa=2.5")]:
        t_py, ref = best_of(lambda: _fallback.matern_half_integer(u, 0.05, case), repeats)
        t_c = None
        if _kernels is not None:
            t_c, out = best_of(lambda: _kernels.matern_half_integer(u, 0.05, case), repeats)
            np.testing.assert_allclose(out, ref, rtol=1e-14)
        rows.append((f"matern {label} ({u.size:,} dists)", t_py, t_c))
    return rows


def bench_selection(repeats):
    rng = np.random.default_rng(1)
    k = 64
    xs = (np.arange(k) + 0.5) / k
    cand = np.array([(x, y) for y in xs for x in xs])
    pv = rng.uniform(0.2, 1.0, size=len(cand))
    design = cand[rng.choice(len(cand), size=30, replace=False)]
    rows = []
    for b, delta in [(10, 0.03), (50, 0.05)]:
        def run(impl):
            active = np.ones(len(cand), dtype=bool)
            return impl.select_min_dist_batch(pv, cand, active, design, b, delta)

        t_py, ref = best_of(lambda: run(_fallback), repeats)
        t_c = None
        if _kernels is not None:
            t_c, out = best_of(lambda: run(_kernels), repeats)
            assert np.array_equal(out[0], ref[0]) and np.array_equal(out[1], ref[1])
        rows.append((f"selection b={b} delta={delta} ({len(cand):,} cands)", t_py, t_c))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="best-of-N timing")
    args = parser.parse_args()

    if _kernels is None:
        print("compiled extension not built; timing the fallback only\n")

    rows = bench_matern(args.repeats) + bench_selection(args.repeats)
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'python':>10}  {'compiled':>10}  {'speedup':>8}")
    for name, t_py, t_c in rows:
        if t_c is None:
            print(f"{name:<{width}}  {t_py * 1e3:>8.2f}ms  {'-':>10}  {'-':>8}")
        else:
            print(f"{name:<{width}}  {t_py * 1e3:>8.2f}ms  {t_c * 1e3:>8.2f}ms  {t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
