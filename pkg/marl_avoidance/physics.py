"""
Deterministic 2D particle physics.

Update order per step (movable entities only): damp velocity, add
applied + contact force times dt, clamp speed, integrate position, clamp to walls.
Immovable entities are never touched.
"""

from typing import List, Sequence, Tuple

import numpy as np

from marl_avoidance.errors import ConfigurationError, InputError
from marl_avoidance.models.world import EntitySpec, WorldConfig, WorldState, radii_of

_TIE_BREAK = np.array([1.0, 0.0])


def _pair_contact(
    pos_a: np.ndarray, pos_b: np.ndarray, dist_min: np.ndarray, cfg: WorldConfig
) -> np.ndarray:
    """Soft-contact force on the first entity of each pair, shape (k, 2)."""
    delta = pos_a - pos_b
    dist = np.sqrt(np.sum(delta * delta, axis=-1))
    safe = np.where(dist > 0, dist, 1.0)
    direction = np.where((dist > 0)[..., None], delta / safe[..., None], _TIE_BREAK)
    penetration = cfg.contact_margin * np.logaddexp(0.0, (dist_min - dist) / cfg.contact_margin)
    magnitude = cfg.contact_stiffness * penetration
    return magnitude[..., None] * direction


def contact_force(
    a: int, b: int, world: WorldState, cfg: WorldConfig, specs: Sequence[EntitySpec]
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Softplus-smoothed contact between entities a and b.

    Returns (force on a, force on b); the second is the exact negation of the first.
    Coincident centres push a along +x.
    """
    dist_min = np.array([specs[a].radius + specs[b].radius])
    force_a = _pair_contact(world.positions[a][None], world.positions[b][None], dist_min, cfg)[0]
    return force_a, -force_a


def contact_forces(positions: np.ndarray, specs: Sequence[EntitySpec], cfg: WorldConfig) -> np.ndarray:
    """Net contact force on every entity, shape (n, 2)."""
    n = len(specs)
    forces = np.zeros((n, 2))
    if n < 2 or cfg.contact_stiffness == 0:
        return forces
    collide = np.array([spec.collide for spec in specs])
    movable = np.array([spec.movable for spec in specs])
    ii, jj = np.triu_indices(n, k=1)
    mask = collide[ii] & collide[jj] & (movable[ii] | movable[jj])
    ii, jj = ii[mask], jj[mask]
    if ii.size == 0:
        return forces
    radii = radii_of(list(specs))
    pair = _pair_contact(positions[ii], positions[jj], radii[ii] + radii[jj], cfg)
    np.add.at(forces, ii, pair)
    np.add.at(forces, jj, -pair)
    return forces


def collision_test(a: int, b: int, world: WorldState, specs: Sequence[EntitySpec]) -> bool:
    # strict: touching discs do not collide
    delta = world.positions[a] - world.positions[b]
    dist = float(np.sqrt(np.sum(delta * delta)))
    return dist < specs[a].radius + specs[b].radius


def collision_matrix(positions: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Boolean (n, n) matrix of strict overlaps, diagonal False."""
    delta = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt(np.sum(delta * delta, axis=-1))
    hit = dist < (radii[:, None] + radii[None, :])
    np.fill_diagonal(hit, False)
    return hit


def movable_indices(specs: Sequence[EntitySpec]) -> List[int]:
    return [i for i, spec in enumerate(specs) if spec.movable]


def _check_forces(forces, n_movable: int) -> np.ndarray:
    forces = np.asarray(forces, dtype=np.float64)
    if n_movable == 0 and forces.size == 0:
        return forces.reshape(0, 2)
    if forces.ndim != 2 or forces.shape[0] != n_movable or forces.shape[1] != 2:
        raise ConfigurationError(
            f"expected {n_movable} force vectors of length 2, got shape {forces.shape}",
            key="forces",
        )
    if not np.all(np.isfinite(forces)):
        raise InputError("forces contain non-finite values")
    if np.any(np.abs(forces) > 1.0 + 1e-12):
        raise InputError("force components must lie in [-1, 1] before accel scaling")
    return forces


def _clamp_to_bounds(pos: np.ndarray, vel: np.ndarray, radii: np.ndarray, cfg: WorldConfig) -> None:
    bounds = cfg.bounds
    if bounds is None:
        return
    lows = np.stack([bounds.xmin + radii, bounds.ymin + radii], axis=1)
    highs = np.stack([bounds.xmax - radii, bounds.ymax - radii], axis=1)
    blocked_low = pos < lows
    blocked_high = pos > highs
    np.copyto(pos, lows, where=blocked_low)
    np.copyto(pos, highs, where=blocked_high)
    vel[blocked_low | blocked_high] = 0.0


def step(
    world: WorldState, forces, cfg: WorldConfig, specs: Sequence[EntitySpec]
) -> WorldState:
    """Advance the world by one Euler step of length cfg.dt."""
    if len(specs) != world.n_entities:
        raise ConfigurationError(
            f"{len(specs)} entity specs for a world of {world.n_entities} entities", key="specs"
        )
    movable = movable_indices(specs)
    forces = _check_forces(forces, len(movable))

    positions = world.positions.copy()
    velocities = world.velocities.copy()
    if movable:
        moving = [specs[i] for i in movable]
        accel = np.array([spec.accel for spec in moving])
        max_speed = np.array([np.inf if spec.max_speed is None else spec.max_speed for spec in moving])

        total = forces * accel[:, None] + contact_forces(world.positions, specs, cfg)[movable]
        vel = velocities[movable] * (1.0 - cfg.damping) + total * cfg.dt

        speed = np.sqrt(np.sum(vel * vel, axis=1))
        over = speed > max_speed
        if np.any(over):
            vel[over] *= (max_speed[over] / speed[over])[:, None]

        pos = positions[movable] + vel * cfg.dt
        _clamp_to_bounds(pos, vel, radii_of(moving), cfg)
        positions[movable] = pos
        velocities[movable] = vel

    return WorldState(
        positions=positions,
        velocities=velocities,
        step_index=world.step_index + 1,
        episode_index=world.episode_index,
    )
