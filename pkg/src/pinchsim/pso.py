"""Projected, penalty-augmented particle swarm search over (positions, powers).

Each particle encodes theta = [antenna x-coordinates; per-user power
fractions].  After every velocity step the particle is projected back onto
the feasible set: positions are clipped to the guide, sorted, and pushed
apart to the minimum spacing by a forward/backward pass; power fractions are
clipped nonnegative and, if their sum exceeds the budget, projected onto the
unit simplex.  Fitness is the worst-case minimum SINR minus a penalty on
decoding-order ambiguity, evaluated by the batched kernels.

Determinism: every particle owns an independent RNG stream spawned from the
master seed, so a run is reproducible regardless of evaluation schedule.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .config import ConfigError, PsoParams, SystemConfig
from .scenario import Scenario


def project_positions(x, waveguide_len, min_spacing):
    """Project raw antenna coordinates onto the feasible ordered layout."""
    out = project_positions_batch(np.asarray(x, dtype=float)[None, :],
                                  waveguide_len, min_spacing)
    return out[0]


def project_positions_batch(xs, waveguide_len, min_spacing):
    """Row-wise position projection: clip -> sort -> forward/backward spacing passes."""
    n = xs.shape[1]
    if (n - 1) * min_spacing > waveguide_len:
        raise ConfigError(
            f"antenna spacing infeasible: ({n} - 1) * min_spacing = "
            f"{(n - 1) * min_spacing} exceeds waveguide_len = {waveguide_len}")
    xs = np.clip(xs, 0.0, waveguide_len)
    xs = np.sort(xs, axis=1)
    for i in range(1, n):
        xs[:, i] = np.maximum(xs[:, i], xs[:, i - 1] + min_spacing)
    xs[:, n - 1] = np.minimum(xs[:, n - 1], waveguide_len)
    for i in range(n - 2, -1, -1):
        xs[:, i] = np.minimum(xs[:, i], xs[:, i + 1] - min_spacing)
    return xs


def project_simplex(a):
    """Project raw power fractions onto {a >= 0, sum(a) <= 1}."""
    return project_simplex_batch(np.asarray(a, dtype=float)[None, :])[0]


def project_simplex_batch(a):
    """Row-wise Euclidean projection onto the nonnegative sub-unit simplex.

    Rows whose clipped sum is within budget keep their slack; rows over
    budget land on the sum-one face via the sorted-threshold projection.
    """
    a = np.maximum(np.asarray(a, dtype=float), 0.0)
    over = a.sum(axis=1) > 1.0
    if np.any(over):
        rows = a[over]
        k = rows.shape[1]
        u = -np.sort(-rows, axis=1)
        cs = np.cumsum(u, axis=1)
        cond = u - (cs - 1.0) / np.arange(1, k + 1) > 0.0
        rho = k - 1 - np.argmax(cond[:, ::-1], axis=1)  # largest index passing
        tau = (cs[np.arange(rows.shape[0]), rho] - 1.0) / (rho + 1.0)
        a[over] = np.maximum(rows - tau[:, None], 0.0)
    return a


def project_theta_batch(thetas, config: SystemConfig):
    """Apply both projections to the position and power blocks of each row."""
    n = config.num_pas
    out = np.array(thetas, dtype=float)
    out[:, :n] = project_positions_batch(out[:, :n], config.waveguide_len,
                                         config.min_spacing)
    out[:, n:] = project_simplex_batch(out[:, n:])
    return out


def split_theta(theta, num_pas):
    """Split a particle vector into (positions, power fractions) views."""
    theta = np.asarray(theta)
    return theta[..., :num_pas], theta[..., num_pas:]


def draw_theta(config: SystemConfig, rng):
    """One feasible candidate: uniform positions, simplex-uniform powers, projected."""
    x = rng.uniform(0.0, config.waveguide_len, config.num_pas)
    e = rng.standard_exponential(config.num_users)
    theta = np.concatenate([x, e / e.sum()])
    return project_theta_batch(theta[None, :], config)[0]


def penalized_fitness(theta, scenario: Scenario, config: SystemConfig,
                      eps=None, eta_r=None):
    """Fitness of a single feasible candidate.

    Returns (fitness, min_sinr, violation_sum): the worst-case minimum SINR,
    the penalty-free objective, and the total decoding-order shortfall.  The
    estimate used for ordering is the nominal channel itself; estimate
    uncertainty enters through the eps-dependent ordering margin and SINR
    weighting only.
    """
    theta = np.asarray(theta, dtype=float)
    xs, alphas = split_theta(theta[None, :], config.num_pas)
    f, gmin, viol = kernels.swarm_fitness(xs, alphas, scenario, config,
                                          eps=eps, eta_r=eta_r)
    return float(f[0]), float(gmin[0]), float(viol[0])


@dataclass
class Swarm:
    """State of the particle population (struct-of-arrays)."""

    theta: np.ndarray         # (P, N+K) current positions
    velocity: np.ndarray      # (P, N+K)
    best_theta: np.ndarray    # (P, N+K) personal bests
    best_fitness: np.ndarray  # (P,)


@dataclass
class PsoResult:
    """Outcome of one optimizer run."""

    best_theta: np.ndarray
    best_x: np.ndarray
    best_alpha: np.ndarray
    best_fitness: float          # final penalized fitness (internal objective)
    best_min_sinr: float         # worst-case min-SINR of the solution at the configured error bound
    trace: np.ndarray            # (T+1,) global-best fitness after init and each iteration
    gbest_thetas: np.ndarray = field(repr=False, default=None)  # (T+1, N+K)


def _velocity_bound(config: SystemConfig, params: PsoParams):
    span = np.concatenate([np.full(config.num_pas, config.waveguide_len),
                           np.ones(config.num_users)])
    return params.velocity_clamp * span


def pso_step(swarm: Swarm, gbest_theta, params: PsoParams, config: SystemConfig,
             evaluate, rngs):
    """One synchronous swarm update against a fixed global best.

    Per particle: draw fresh cognitive/social multipliers from its own
    stream, update and clamp the velocity, move, project back to
    feasibility, re-evaluate, and keep the personal best on strict
    improvement.
    """
    r1 = np.array([rng.random() for rng in rngs])
    r2 = np.array([rng.random() for rng in rngs])
    vel = (params.inertia * swarm.velocity
           + params.cognitive * r1[:, None] * (swarm.best_theta - swarm.theta)
           + params.social * r2[:, None] * (gbest_theta[None, :] - swarm.theta))
    bound = _velocity_bound(config, params)
    np.clip(vel, -bound, bound, out=vel)
    swarm.velocity = vel
    swarm.theta = project_theta_batch(swarm.theta + vel, config)
    fitness, _, _ = evaluate(swarm.theta)
    improved = fitness > swarm.best_fitness
    swarm.best_theta[improved] = swarm.theta[improved]
    swarm.best_fitness[improved] = fitness[improved]
    return swarm


def optimize(scenario: Scenario, config: SystemConfig, params: PsoParams,
             seed: int, robust: bool = True) -> PsoResult:
    """Joint search over antenna positions and power fractions.

    robust=True evaluates fitness at the configured estimate-error bound;
    robust=False evaluates at a zero bound (perfect estimates, no leakage).
    Either way the returned solution's ``best_min_sinr`` is re-scored under
    the worst-case evaluation at the configured bound, so modes are
    comparable.  Deterministic given (scenario, config, params, seed).
    """
    n = config.num_pas
    rngs = [np.random.default_rng((int(seed), i)) for i in range(params.num_particles)]
    theta = np.stack([draw_theta(config, rng) for rng in rngs])
    eval_eps = config.csi_eps if robust else 0.0
    eval_eta_r = config.eta_r if robust else 0.0

    def evaluate(thetas):
        xs, alphas = split_theta(thetas, n)
        return kernels.swarm_fitness(xs, alphas, scenario, config,
                                     eps=eval_eps, eta_r=eval_eta_r)

    fitness, _, _ = evaluate(theta)
    swarm = Swarm(theta=theta, velocity=np.zeros_like(theta),
                  best_theta=theta.copy(), best_fitness=fitness.copy())

    trace = np.empty(params.max_iters + 1)
    gbest_thetas = np.empty((params.max_iters + 1, theta.shape[1]))
    gi = int(np.argmax(swarm.best_fitness))
    gbest = swarm.best_theta[gi].copy()
    trace[0] = swarm.best_fitness[gi]
    gbest_thetas[0] = gbest

    for t in range(1, params.max_iters + 1):
        pso_step(swarm, gbest, params, config, evaluate, rngs)
        gi = int(np.argmax(swarm.best_fitness))
        gbest = swarm.best_theta[gi].copy()
        trace[t] = swarm.best_fitness[gi]
        gbest_thetas[t] = gbest

    xs, alphas = split_theta(gbest[None, :], n)
    _, robust_gmin, _ = kernels.swarm_fitness(xs, alphas, scenario, config)
    return PsoResult(best_theta=gbest,
                     best_x=gbest[:n].copy(),
                     best_alpha=gbest[n:].copy(),
                     best_fitness=float(trace[-1]),
                     best_min_sinr=float(robust_gmin[0]),
                     trace=trace,
                     gbest_thetas=gbest_thetas)
