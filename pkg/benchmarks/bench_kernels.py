"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--nodes 1601] [--steps 4000] [--repeat 3]

Times the block-tridiagonal solve and the fused IMEX stepper on a toy front
and checks that both backends agree.
"""

import argparse
import time

import numpy as np

from frontspeed.asymptotics import toy_explicit_front
from frontspeed.grid import build_grid
from frontspeed.kernels import get_backend


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=1601)
    ap.add_argument("--steps", type=int, default=4000)
    ap.add_argument("--solves", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    grid = build_grid(40.0, args.nodes)
    front = toy_explicit_front(0.5, grid)
    Deff = np.diag([1.05, 0.95])
    dt = 5 * grid.h**2
    r = dt / grid.h**2
    m = args.nodes - 2
    blocks = (
        np.broadcast_to(np.eye(2) + 2 * r * Deff, (m, 2, 2)),
        np.broadcast_to(-r * Deff, (m - 1, 2, 2)),
        np.broadcast_to(-r * Deff, (m - 1, 2, 2)),
    )
    rhs = np.random.default_rng(0).standard_normal((m, 2))

    names = ["python"]
    try:
        get_backend("compiled")
        names.append("compiled")
    except ImportError:
        print("compiled backend unavailable; timing the Python fallback only")

    results = {}
    for name in names:
        k = get_backend(name)
        factor = k.block_tridiag_factor(*blocks)

        def solves():
            for _ in range(args.solves):
                x = k.block_tridiag_solve(factor, rhs)
            return x

        def stepper():
            return k.imex_advance(front.values, args.steps, dt, grid.h, Deff, 2, [0.5, 0, 0, 0], 100, [-1.0, 1.0], 0.0)

        t_solve, x = best_of(solves, args.repeat)
        t_step, run = best_of(stepper, args.repeat)
        results[name] = (t_solve / args.solves, t_step / args.steps, x, run[0])

    print(f"nodes={args.nodes} steps={args.steps} solves={args.solves}")
    print(f"{'backend':<10}{'solve [us]':>14}{'step [us]':>14}")
    for name, (ts, tp, _, _) in results.items():
        print(f"{name:<10}{ts * 1e6:>14.1f}{tp * 1e6:>14.1f}")
    if len(results) == 2:
        py, cc = results["python"], results["compiled"]
        print(f"speed-up: solve x{py[0] / cc[0]:.1f}, step x{py[1] / cc[1]:.1f}")
        print(f"max difference: solve {np.max(np.abs(py[2] - cc[2])):.2e}, field {np.max(np.abs(py[3] - cc[3])):.2e}")


if __name__ == "__main__":
    main()
