"""Walk-on-spheres throughput: compiled core against the numpy fallback.

    python benchmarks/bench_wos.py [--walks N]

Both backends consume the same random stream, so their hit counts must agree
exactly; the script checks that before reporting timings.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from haymanwu import wos
from haymanwu.harmonic import WOS_ESCAPE, WOS_SHELL, double_slit_problem, halfplane_problem, slit_problem


def _args(problem, z, n, seed):
    g = problem.geometry
    return (
        np.ascontiguousarray(z.real),
        np.ascontiguousarray(z.imag),
        n,
        seed,
        np.ascontiguousarray(g.segments, dtype=float).reshape(-1, 4),
        np.ascontiguousarray(g.arcs, dtype=float).reshape(-1, 5),
        float(g.slack),
        -1.0,
        1.0,
        WOS_SHELL,
        WOS_ESCAPE,
        100000,
    )


def bench(problem, n: int, seed: int = 7):
    z = np.array([0.3 + 0.8j, -0.5 + 0.4j])
    out = {}
    for backend in sorted(wos.BACKENDS):
        t0 = time.perf_counter()
        hits, steps, _ = wos.walk_batch(*_args(problem, z, n, seed), backend=backend)
        dt = time.perf_counter() - t0
        out[backend] = (hits, dt, int(steps.sum()))
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--walks", type=int, default=20000, help="walks per start point")
    args = ap.parse_args()
    problems = [halfplane_problem(), slit_problem(2.0, 1.0), double_slit_problem(2.0, 1.0, -3.0, 0.8)]
    print(f"{'domain':<36}{'backend':<10}{'walks/s':>12}{'steps/walk':>12}")
    for p in problems:
        res = bench(p, args.walks)
        hits = [r[0] for r in res.values()]
        if any(not np.array_equal(hits[0], h) for h in hits[1:]):
            raise SystemExit(f"backends disagree on {p.name}: {hits}")
        for backend, (_, dt, steps) in res.items():
            walks = 2 * args.walks
            print(f"{p.name:<36}{backend:<10}{walks / dt:>12.0f}{steps / walks:>12.1f}")
        if len(res) == 2:
            print(f"{'':<36}{'speedup':<10}{res['python'][1] / res['cython'][1]:>12.1f}")


if __name__ == "__main__":
    main()
