"""Throughput comparison of the heat-bath sweep kernels.

Runs identical sweep workloads through the compiled extension and the pure
Python fallback, reports site-updates per second, and verifies the two
trajectories agree bitwise.

Usage: python benchmarks/bench_glauber.py [--n-side 32] [--sweeps 50]
"""

import argparse
import importlib
import time

import numpy as np

from soficlab import soficmaps
from soficlab.constraints import hardcore
from soficlab.sampling import GlauberEngine


def load_backends():
    backends = {}
    try:
        backends["cython"] = importlib.import_module("soficlab._glauber").glauber_sweeps
    except ImportError:
        pass
    backends["python"] = importlib.import_module("soficlab._glauber_py").glauber_sweeps
    return backends


def run(kernel, engine, sweeps, uniforms):
    x = engine.initial_state(0)
    t0 = time.perf_counter()
    kernel(x, engine.nbr_out, engine.nbr_in, engine.wh, engine.wj, engine.allowed, uniforms, sweeps)
    return x, time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-side", type=int, default=32, help="torus side length (d=2)")
    ap.add_argument("--sweeps", type=int, default=50)
    ap.add_argument("--lam", type=float, default=1.0)
    args = ap.parse_args()

    st, pot = hardcore(2, args.lam)
    sm = soficmaps.build_torus(2, args.n_side)
    engine = GlauberEngine(sm, st, pot)
    rng = np.random.default_rng(0)
    uniforms = rng.random(args.sweeps * sm.n)
    updates = args.sweeps * sm.n

    print(f"hardcore lambda={args.lam} on the {args.n_side}x{args.n_side} torus, "
          f"{args.sweeps} sweeps = {updates:,} site updates\n")
    results = {}
    for name, kernel in load_backends().items():
        x, dt = run(kernel, engine, args.sweeps, uniforms)
        results[name] = (x, dt)
        print(f"{name:>7}: {dt:8.3f} s   {updates / dt / 1e6:8.2f} M updates/s")
    if len(results) == 2:
        same = np.array_equal(results["cython"][0], results["python"][0])
        ratio = results["python"][1] / results["cython"][1]
        print(f"\ntrajectories bitwise equal: {same}")
        print(f"speedup: {ratio:.1f}x")


if __name__ == "__main__":
    main()
