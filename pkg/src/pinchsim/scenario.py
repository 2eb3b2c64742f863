"""Randomized scene generation: user drops and spherical obstacles.

A ``Scenario`` is one realization of the environment.  Users are dropped
uniformly over the service rectangle in front of the waveguide (y > 0,
ground level); obstacles are spheres with centers drawn uniformly in the
volume between ground and antenna height.  Generation is a pure function of
(config, seed).
"""

from dataclasses import dataclass

import numpy as np

from .config import ConfigError, SystemConfig


@dataclass(frozen=True)
class Scenario:
    """One environment realization, immutable after construction."""

    users: np.ndarray             # (K, 3) points, z = 0, y > 0
    obstacle_centers: np.ndarray  # (O, 3)
    obstacle_radii: np.ndarray    # (O,)
    seed: int


def _open_unit(rng, shape):
    """Uniform draw on the open interval (0, 1); redraws exact zeros."""
    out = rng.random(shape)
    while np.any(out <= 0.0):
        mask = out <= 0.0
        out[mask] = rng.random(int(mask.sum()))
    return out


def generate_scenario(config: SystemConfig, seed: int) -> Scenario:
    """Draw one scenario deterministically from (config, seed).

    Users: uniform over (0, area_x) x (0, area_y) at z = 0.
    Obstacles: centers uniform over the service volume with z in (0, pa_height),
    radii uniform over config.obstacle_radius_range.

    Users and obstacles come from separate sub-streams of the seed, drawn
    row-wise, so a sweep that varies the user count keeps the obstacles and
    the first k users identical across grid points (paired comparison).
    """
    config.validate()
    user_rng = np.random.default_rng((int(seed), 0))
    k = config.num_users
    users = np.zeros((k, 3))
    users[:, :2] = _open_unit(user_rng, (k, 2)) * [config.area_x, config.area_y]

    obst_rng = np.random.default_rng((int(seed), 1))
    o = config.obstacle_count
    centers = _open_unit(obst_rng, (o, 3)) * [config.area_x, config.area_y,
                                              config.pa_height]
    lo, hi = config.obstacle_radius_range
    radii = obst_rng.uniform(lo, hi, o) if o else np.zeros(0)
    return Scenario(users=users, obstacle_centers=centers,
                    obstacle_radii=radii, seed=int(seed))


def uniform_layout(config: SystemConfig) -> np.ndarray:
    """Evenly spaced antenna x-coordinates over [0, L].

    N >= 2 spans the full guide including both ends; a single antenna sits at
    the midpoint.  Raises ConfigError when the even spacing would violate the
    minimum-separation constraint.
    """
    n, L = config.num_pas, config.waveguide_len
    if n == 1:
        return np.array([L / 2.0])
    gap = L / (n - 1)
    if gap < config.min_spacing:
        raise ConfigError(
            f"uniform layout infeasible: even spacing {gap} is below "
            f"min_spacing = {config.min_spacing}")
    return np.linspace(0.0, L, n)
