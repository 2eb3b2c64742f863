"""Monte-Carlo comparison harness for the four design schemes.

Schemes: RobustPSO (search under the worst-case evaluation), NonRobustPSO
(search under perfect-estimate evaluation), Random (one feasible draw) and
Uniform (evenly spaced antennas, equal power split).  Every scheme's final
candidate is scored with the same evaluation so curves are comparable; by
default that is the worst-case (conservative) min-SINR at the configured
error bound.

Realizations are embarrassingly parallel: each derives its own seeds from
the master seed, so results are independent of the worker count, and rows
are gathered in a fixed order.  The CSV schema is one row per (sweep point,
realization, scheme) with linear and dB min-SINR.
"""

import dataclasses
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import channel, kernels, noma, pso
from .config import ExperimentSettings, PsoParams, SystemConfig
from .scenario import Scenario, generate_scenario, uniform_layout

SCHEMES = ("RobustPSO", "NonRobustPSO", "Random", "Uniform")

CSV_HEADER = "sweep_var,sweep_value,scheme,seed,min_sinr_linear,min_sinr_db,runtime_ms"

# RNG stream tags, outside the per-particle stream range used by the optimizer
_RANDOM_SCHEME_STREAM = 2 ** 32
_CSI_SAMPLE_STREAM = 2 ** 32 + 1


@dataclass(frozen=True)
class SweepRecord:
    """One scored scheme on one realization of one sweep point."""

    sweep_var: str
    sweep_value: float
    scheme: str
    seed: int
    min_sinr_linear: float
    min_sinr_db: float
    runtime_ms: float


@dataclass
class ConvergenceTraces:
    """Aggregated optimizer traces for the two search-based schemes.

    fitness holds the mean internal global-best fitness per iteration (each
    underlying per-realization trace is nondecreasing by construction);
    rescored_min_sinr holds the mean worst-case min-SINR of the running
    global best, which puts both schemes on a common scale.
    """

    iterations: np.ndarray                 # (T+1,)
    fitness: dict                          # scheme -> (T+1,) mean trace
    rescored_min_sinr: dict                # scheme -> (T+1,) mean trace
    per_realization_fitness: dict          # scheme -> (R, T+1)


def to_db(linear):
    return 10.0 * np.log10(linear)


def realization_seeds(master_seed, count):
    """Derived 64-bit seeds, one per realization, stable given the master seed."""
    return [int(s) for s in
            np.random.SeedSequence(int(master_seed)).generate_state(count, dtype=np.uint64)]


def score_candidate(x_pos, alpha, scenario: Scenario, config: SystemConfig,
                    mode="conservative", seed=0):
    """Final scoring shared by all schemes.

    conservative: worst-case min-SINR at the configured error bound with the
    nominal channel as the estimate.  true_sampled: draw one estimate-error
    realization, order by the estimates, and evaluate the nominal SINR of
    the true channels in that order.
    """
    if mode == "conservative":
        _, gmin, _ = pso.penalized_fitness(np.concatenate([x_pos, alpha]),
                                           scenario, config)
        return gmin
    rng = np.random.default_rng((int(seed), _CSI_SAMPLE_STREAM))
    chans = channel.compute_channels(x_pos, scenario, config, rng=rng)
    order = noma.conservative_order(chans.h_hat, config.csi_eps).order
    h_sq = np.abs(chans.h[order]) ** 2
    sinrs = noma.true_sinr(h_sq, np.asarray(alpha)[order],
                           config.tx_power, config.noise_power)
    return noma.min_sinr(sinrs)


def run_scheme(scheme, scenario: Scenario, config: SystemConfig,
               pso_params: PsoParams, seed, sweep_var="csi_eps",
               sweep_value=None, record_runtime=False,
               score_mode="conservative") -> SweepRecord:
    """Run one scheme on one realization and return its scored record."""
    if sweep_value is None:
        sweep_value = config.csi_eps
    t0 = time.perf_counter()
    if scheme == "RobustPSO":
        result = pso.optimize(scenario, config, pso_params, seed, robust=True)
        x_pos, alpha = result.best_x, result.best_alpha
    elif scheme == "NonRobustPSO":
        result = pso.optimize(scenario, config, pso_params, seed, robust=False)
        x_pos, alpha = result.best_x, result.best_alpha
    elif scheme == "Random":
        rng = np.random.default_rng((int(seed), _RANDOM_SCHEME_STREAM))
        theta = pso.draw_theta(config, rng)
        x_pos, alpha = pso.split_theta(theta, config.num_pas)
    elif scheme == "Uniform":
        x_pos = uniform_layout(config)
        alpha = np.full(config.num_users, 1.0 / config.num_users)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    gmin = score_candidate(x_pos, alpha, scenario, config,
                           mode=score_mode, seed=seed)
    runtime_ms = (time.perf_counter() - t0) * 1e3 if record_runtime else 0.0
    return SweepRecord(sweep_var=sweep_var, sweep_value=float(sweep_value),
                       scheme=scheme, seed=int(seed),
                       min_sinr_linear=float(gmin),
                       min_sinr_db=float(to_db(gmin)),
                       runtime_ms=runtime_ms)


def map_realizations(task, count, threads):
    """Apply an index-keyed task over realizations, in order, on a thread pool.

    threads=1 runs inline; threads=0 sizes the pool from the CPU count.  The
    output order is fixed regardless of schedule.
    """
    if threads == 1 or count <= 1:
        return [task(i) for i in range(count)]
    workers = threads if threads > 0 else min(32, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, range(count)))


def _sweep(config: SystemConfig, pso_params: PsoParams, sweep_var, grid,
           make_config, num_realizations, master_seed, threads,
           settings: ExperimentSettings, progress=None):
    seeds = realization_seeds(master_seed, num_realizations)

    def one_point(point_value):
        point_config = make_config(point_value)

        def one_realization(r):
            scenario = generate_scenario(point_config, seeds[r])
            return [run_scheme(s, scenario, point_config, pso_params, seeds[r],
                               sweep_var=sweep_var, sweep_value=point_value,
                               record_runtime=settings.record_runtime,
                               score_mode=settings.score_mode)
                    for s in SCHEMES]

        nested = map_realizations(one_realization, num_realizations, threads)
        return [rec for group in nested for rec in group]

    records = []
    for value in grid:
        records.extend(one_point(value))
        if progress is not None:
            progress(f"{sweep_var}={value} done")
    return records


def sweep_epsilon(config: SystemConfig, pso_params: PsoParams,
                  settings: ExperimentSettings, master_seed, threads=1,
                  progress=None):
    """All schemes across the estimate-error grid.

    The scenario draw does not depend on the error bound, so each
    realization index reuses the same geometry at every grid point (paired
    comparison).
    """
    return _sweep(config, pso_params, "csi_eps", settings.eps_grid,
                  lambda e: dataclasses.replace(config, csi_eps=float(e)),
                  settings.realizations, master_seed, threads, settings,
                  progress)


def sweep_users(config: SystemConfig, pso_params: PsoParams,
                settings: ExperimentSettings, master_seed, threads=1,
                progress=None):
    """All schemes across the user-count grid."""
    return _sweep(config, pso_params, "num_users", settings.k_grid,
                  lambda k: dataclasses.replace(config, num_users=int(k)),
                  settings.realizations, master_seed, threads, settings,
                  progress)


def convergence_trace(config: SystemConfig, pso_params: PsoParams,
                      num_realizations, master_seed, threads=1,
                      progress=None) -> ConvergenceTraces:
    """Mean optimizer traces for the robust and non-robust search modes.

    Both the internal fitness trace and the worst-case re-scored min-SINR of
    the running global best are aggregated; the latter is what makes the two
    modes comparable at the configured error bound.
    """
    seeds = realization_seeds(master_seed, num_realizations)
    schemes = ("RobustPSO", "NonRobustPSO")

    def one_realization(r):
        scenario = generate_scenario(config, seeds[r])
        out = {}
        for scheme in schemes:
            result = pso.optimize(scenario, config, pso_params, seeds[r],
                                  robust=(scheme == "RobustPSO"))
            xs, alphas = pso.split_theta(result.gbest_thetas, config.num_pas)
            _, rescored, _ = kernels.swarm_fitness(xs, alphas, scenario, config)
            out[scheme] = (result.trace, rescored)
        if progress is not None:
            progress(f"realization {r + 1}/{num_realizations} done")
        return out

    per_real = map_realizations(one_realization, num_realizations, threads)
    iters = np.arange(pso_params.max_iters + 1)
    fitness, rescored, stacks = {}, {}, {}
    for scheme in schemes:
        f = np.stack([res[scheme][0] for res in per_real])
        g = np.stack([res[scheme][1] for res in per_real])
        fitness[scheme] = f.mean(axis=0)
        rescored[scheme] = g.mean(axis=0)
        stacks[scheme] = f
    return ConvergenceTraces(iterations=iters, fitness=fitness,
                             rescored_min_sinr=rescored,
                             per_realization_fitness=stacks)


def _fmt(value):
    return f"{value:.9g}"


def records_to_csv_text(records):
    lines = [CSV_HEADER]
    for r in records:
        lines.append(",".join([
            r.sweep_var, _fmt(r.sweep_value), r.scheme, str(r.seed),
            _fmt(r.min_sinr_linear), _fmt(r.min_sinr_db), _fmt(r.runtime_ms)]))
    return "\n".join(lines) + "\n"


def convergence_to_csv_text(traces: ConvergenceTraces):
    lines = ["scheme,iteration,mean_gbest_fitness,mean_min_sinr_linear,mean_min_sinr_db"]
    for scheme in traces.fitness:
        f = traces.fitness[scheme]
        g = traces.rescored_min_sinr[scheme]
        for t in traces.iterations:
            lines.append(",".join([scheme, str(int(t)), _fmt(f[t]),
                                   _fmt(g[t]), _fmt(to_db(g[t]))]))
    return "\n".join(lines) + "\n"


def write_text_atomic(path, text):
    """Write via a temp file + rename so failures leave no partial output."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def aggregate_mean_db(records):
    """Mean dB min-SINR keyed by (sweep_value, scheme), insertion-ordered."""
    groups = {}
    for r in records:
        groups.setdefault((r.sweep_value, r.scheme), []).append(r.min_sinr_db)
    return {key: float(np.mean(vals)) for key, vals in groups.items()}
