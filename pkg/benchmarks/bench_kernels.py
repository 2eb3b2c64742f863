#!/usr/bin/env python3
"""Throughput comparison of the fitness-kernel backends (numba vs numpy).

Times the batched candidate-evaluation kernel across swarm sizes on the
default system, checks that the two backends agree numerically, and prints a
speedup table.

Usage:
    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --sizes 30,60,240,960 --repeats 30
"""

import argparse
import time

import numpy as np

from pinchsim import SystemConfig, generate_scenario
from pinchsim.kernels import (NUMBA_AVAILABLE, swarm_fitness_numba,
                              swarm_fitness_numpy)
from pinchsim.pso import draw_theta


def kernel_args(config, scenario, thetas):
    n = config.num_pas
    return (np.ascontiguousarray(thetas[:, :n]),
            np.ascontiguousarray(thetas[:, n:]),
            scenario.users, scenario.obstacle_centers, scenario.obstacle_radii,
            config.wavelength, config.guide_wavelength, config.wg_loss,
            config.pa_height, config.blockage_beta, config.blockage_alpha,
            config.tx_power, config.noise_power, config.csi_eps,
            config.eta_i, config.eta_r, config.penalty_mu)


def best_time(fn, args, repeats):
    fn(*args)  # warmup (and numba compilation on first call)
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="15,60,240,960,3840",
                        help="comma-separated swarm sizes")
    parser.add_argument("--repeats", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    config = SystemConfig()
    scenario = generate_scenario(config, args.seed)
    rng = np.random.default_rng(args.seed)
    sizes = [int(s) for s in args.sizes.split(",")]

    print(f"numba available: {NUMBA_AVAILABLE}")
    print(f"{'batch':>6} {'numpy us':>10} {'numba us':>10} {'speedup':>8}  agree")
    for size in sizes:
        thetas = np.stack([draw_theta(config, rng) for _ in range(size)])
        ka = kernel_args(config, scenario, thetas)
        t_np = best_time(swarm_fitness_numpy, ka, args.repeats)
        if NUMBA_AVAILABLE:
            t_nb = best_time(swarm_fitness_numba, ka, args.repeats)
            f_np, g_np, v_np = swarm_fitness_numpy(*ka)
            f_nb, g_nb, v_nb = swarm_fitness_numba(*ka)
            agree = (np.allclose(f_np, f_nb, rtol=1e-9)
                     and np.allclose(g_np, g_nb, rtol=1e-9)
                     and np.allclose(v_np, v_nb, rtol=1e-9, atol=1e-15))
            print(f"{size:>6} {t_np * 1e6:>10.1f} {t_nb * 1e6:>10.1f} "
                  f"{t_np / t_nb:>7.1f}x  {'yes' if agree else 'NO'}")
        else:
            print(f"{size:>6} {t_np * 1e6:>10.1f} {'-':>10} {'-':>8}  -")


if __name__ == "__main__":
    main()
