"""Compare the compiled and numpy kernel backends.

Usage:
    python3 benchmarks/bench_kernels.py [--repeat 5]

Times the three hot kernels on vehicle-sized inputs (n = 4, m = 2) and a
short MEE-KF run with each backend, and checks that both give the same
answer.
"""

import argparse
import timeit

import numpy as np

from meekf import systems
from meekf.filters import initial_state, run_filter
from meekf.mee_core import FixedPointConfig, _backend, kernel, laplacian, solver
from meekf.statespace import NoiseSpec, simulate_linear


def _instance(rng, n=4, m=2):
    L = n + m
    W = rng.normal(size=(L, n))
    d = W @ rng.normal(size=n) + rng.normal(size=L)
    return np.ascontiguousarray(d), np.ascontiguousarray(W)


def bench_kernels(mod, repeat, number):
    rng = np.random.default_rng(0)
    d, W = _instance(rng)
    e = rng.normal(size=6)
    out = np.empty((6, 6))
    weights = np.empty((6, 6))

    def fixed_point():
        x = np.zeros(4)
        mod.solve_fixed_point(d, W, x, 2.0, 1e-6, 100, 1e-10, 0, weights)

    cases = {
        "information_potential": lambda: mod.information_potential(e, 1.5),
        "gaussian_laplacian": lambda: mod.gaussian_laplacian(e, 1.5, out),
        "solve_fixed_point": fixed_point,
    }
    return {name: min(timeit.repeat(fn, repeat=repeat, number=number)) / number for name, fn in cases.items()}


def bench_filter(mod, steps):
    for target in (solver, laplacian, kernel):
        target.kernels = mod
    model = systems.vehicle_model(4)
    traj = simulate_linear(model, systems.VEHICLE_X0, steps, NoiseSpec.gaussian(0.01),
                           systems.VEHICLE_NOISE_CASES[4], seed=1)
    prior = initial_state(systems.VEHICLE_PRIOR_X, systems.VEHICLE_PRIOR_P)
    start = timeit.default_timer()
    states = run_filter("MEEKF", prior, traj.measurements, model, FixedPointConfig(1.5))
    return timeit.default_timer() - start, np.array([s.x_post for s in states])


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--number", type=int, default=2000)
    parser.add_argument("--steps", type=int, default=2000)
    args = parser.parse_args(argv)

    mods = {"python": _backend.get_kernels("python")}
    try:
        mods["cython"] = _backend.get_kernels("cython")
    except ImportError:
        print("compiled extension not available; timing the numpy backend only")

    kern = {name: bench_kernels(mod, args.repeat, args.number) for name, mod in mods.items()}
    print(f"{'kernel':<24}" + "".join(f"{name + ' (us)':>16}" for name in mods) + f"{'speedup':>10}")
    for op in kern["python"]:
        row = f"{op:<24}" + "".join(f"{kern[name][op] * 1e6:>16.2f}" for name in mods)
        if "cython" in kern:
            row += f"{kern['python'][op] / kern['cython'][op]:>10.1f}"
        print(row)

    original = _backend.kernels
    try:
        runs = {name: bench_filter(mod, args.steps) for name, mod in mods.items()}
    finally:
        for target in (solver, laplacian, kernel):
            target.kernels = original
    print(f"\nMEE-KF, {args.steps} vehicle steps")
    for name, (secs, _) in runs.items():
        print(f"  {name:<8}{secs:8.3f} s")
    if "cython" in runs:
        gap = np.max(np.abs(runs["python"][1] - runs["cython"][1]))
        print(f"  speedup {runs['python'][0] / runs['cython'][0]:.1f}x, max estimate difference {gap:.2e}")


if __name__ == "__main__":
    main()
