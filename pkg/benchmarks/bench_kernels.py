"""Time the pointwise kernels under both backends.

Usage::

    python benchmarks/bench_kernels.py [--sizes 32 64 128] [--repeat 5]

Each kernel is called on flat arrays of ``n * n`` samples (one 2D slab of a
d_h = 1 grid). The first numba call (compilation or cache load) is excluded.
Also reports the mean wall time of one rescaled-solver step at the default
configuration with whichever backend is active.
"""

import argparse
import timeit

import numpy as np

from hydro_oldroyd import eps_solver, kernels
from hydro_oldroyd.config import RunConfig


def kernel_args(name, n, rng):
    if name == "closure_stresses":
        return (rng.standard_normal(n), rng.standard_normal(n), 0.5, 0.3)
    if name == "shear_flux":
        return tuple(rng.standard_normal(n) for _ in range(4)) + (0.91,)
    return (
        rng.standard_normal((6, n)),
        rng.standard_normal((9, n)),
        rng.standard_normal((6, n)),
        0.1,
        0.5,
        0.3,
    )


def bench(sizes, repeat):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'samples':>9}{'numpy [us]':>13}{'numba [us]':>13}{'speedup':>9}")
    for name in ("closure_stresses", "shear_flux", "stress_source"):
        for side in sizes:
            args = kernel_args(name, side * side, rng)
            times = {}
            for backend in ("numpy", "numba"):
                fn = kernels.IMPLEMENTATIONS[backend][name]
                fn(*args)
                number = max(1, 20000 // side)
                best = min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number
                times[backend] = best * 1e6
            speed = times["numpy"] / times["numba"]
            print(f"{name:<18}{side * side:>9}{times['numpy']:>13.1f}{times['numba']:>13.1f}{speed:>9.2f}")


def bench_step(repeat):
    cfg = RunConfig()
    state = eps_solver.initial_state(
        eps_solver.initial_velocity(cfg.make_grid(), cfg.params.delta), cfg.material(), cfg.params.eps
    )
    params = cfg.material()
    eps_solver.step(state, cfg.stepping.dt, params)
    best = min(timeit.repeat(lambda: eps_solver.step(state, cfg.stepping.dt, params), number=50, repeat=repeat)) / 50
    print(f"rescaled step (32x32, backend={kernels.BACKEND}): {best * 1e3:.3f} ms")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    bench(args.sizes, args.repeat)
    bench_step(args.repeat)


if __name__ == "__main__":
    main()
