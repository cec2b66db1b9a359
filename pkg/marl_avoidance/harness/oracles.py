"""
Independent reference computations used by the verification suites.

Rewards are recomputed here with explicit loops over entity pairs, sharing no
code with ``scenarios.reward``.
"""

import math
from typing import List, Optional, Sequence

import numpy as np

from marl_avoidance.buffers import Batch
from marl_avoidance.models.scenario import ScenarioSpec
from marl_avoidance.models.world import WorldState
from marl_avoidance.scenarios import compose_world, reset_world


def _dist(a: Sequence[float], b: Sequence[float]) -> float:
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return math.sqrt(dx * dx + dy * dy)


def _hits(world: WorldState, spec: ScenarioSpec, i: int, j: int) -> bool:
    pos = world.positions
    return _dist(pos[i], pos[j]) < spec.entities[i].radius + spec.entities[j].radius


def _count_pairs(world: WorldState, spec: ScenarioSpec, group_a: List[int], group_b: List[int]) -> int:
    count = 0
    same = group_a == group_b
    for x, i in enumerate(group_a):
        for y, j in enumerate(group_b):
            if same and y <= x:
                continue
            if _hits(world, spec, i, j):
                count += 1
    return count


def _prey_boundary(value: float) -> float:
    x = abs(value)
    if x < 0.9:
        return 0.0
    if x < 1.0:
        return (x - 0.9) * 10.0
    return min(math.exp(2.0 * x - 2.0), 10.0)


def oracle_reward(world: WorldState, spec: ScenarioSpec) -> List[float]:
    params = spec.reward_params
    pos = world.positions
    agents, obstacles = spec.agent_indices, spec.obstacle_indices

    if spec.name == "obstacle-predator-prey":
        rewards = []
        captures = 0
        shaping = 0.0
        for y in spec.adversary_indices:
            shaping += min(_dist(pos[i], pos[y]) for i in agents)
            captures += sum(1 for i in agents if _hits(world, spec, i, y))
        events = _count_pairs(world, spec, agents, agents) + _count_pairs(world, spec, agents, obstacles)
        predator = params.capture_bonus * captures - params.shaping * shaping - params.collision_penalty * events
        rewards.extend([predator] * len(agents))
        for y in spec.adversary_indices:
            own_captures = sum(1 for i in agents if _hits(world, spec, i, y))
            boundary = _prey_boundary(pos[y][0]) + _prey_boundary(pos[y][1])
            crashes = sum(1 for o in obstacles if _hits(world, spec, y, o))
            rewards.append(
                params.shaping * min(_dist(pos[i], pos[y]) for i in agents)
                - params.capture_bonus * own_captures
                - boundary
                - params.collision_penalty * crashes
            )
        return rewards

    landmarks = spec.landmark_indices
    if spec.designated_targets:
        rewards = []
        for k, i in enumerate(agents):
            crashes = sum(1 for j in agents if j != i and _hits(world, spec, i, j))
            crashes += sum(1 for o in obstacles if _hits(world, spec, i, o))
            rewards.append(-_dist(pos[i], pos[landmarks[k]]) - params.collision_penalty * crashes)
        return rewards

    coverage = sum(min(_dist(pos[m], pos[i]) for i in agents) for m in landmarks)
    events = _count_pairs(world, spec, agents, agents) + _count_pairs(world, spec, agents, obstacles)
    shared = -coverage - params.collision_penalty * events
    return [shared] * len(agents)


def random_world(spec: ScenarioSpec, rng: np.random.Generator, extent: float = 1.2) -> WorldState:
    """Arbitrary positions for every entity, dense enough that collisions are common."""
    scale = extent * rng.uniform(0.2, 1.0)
    return compose_world(
        spec,
        rng.uniform(-scale, scale, size=(spec.n_learners, 2)),
        rng.uniform(-scale, scale, size=(spec.n_landmarks, 2)),
        rng.uniform(-scale, scale, size=(spec.n_obstacles, 2)),
        velocities=None,
    )


def stationary_on_targets_return(spec: ScenarioSpec, episodes: int, rng: np.random.Generator) -> float:
    """
    Mean return when every agent starts on a landmark and never moves.

    Serves as the optimum reference for navigation scenarios; obstacle overlaps
    at the start still cost their penalty.
    """
    totals = []
    for episode in range(episodes):
        world = reset_world(spec, rng, episode_index=episode)
        landmarks = world.positions[spec.landmark_indices]
        world = compose_world(
            spec,
            landmarks[: spec.n_learners],
            landmarks,
            world.positions[spec.obstacle_indices],
        )
        per_step = np.array(oracle_reward(world, spec))
        totals.append(float(per_step[spec.agent_indices].mean()) * spec.max_episode_len)
    return float(np.mean(totals))


def random_batch(
    rng: np.random.Generator,
    obs_dims: Sequence[int],
    size: int,
    shared_reward: bool = False,
    seq_length: Optional[int] = None,
    terminal_rate: float = 0.1,
) -> Batch:
    """
    Synthetic training batch with s = concat(obs) and s' = concat(obs').

    With ``seq_length`` the batch carries observation windows whose newest row
    is the stored observation, and next windows shifted one step forward.
    """
    n = len(obs_dims)
    obs = [rng.normal(size=(size, d)) for d in obs_dims]
    next_obs = [rng.normal(size=(size, d)) for d in obs_dims]
    actions = [rng.uniform(-1.0, 1.0, size=(size, 2)) for _ in obs_dims]
    if shared_reward:
        rewards = np.repeat(rng.normal(size=(size, 1)), n, axis=1)
    else:
        rewards = rng.normal(size=(size, n))
    batch = Batch(
        state=np.concatenate(obs, axis=1),
        next_state=np.concatenate(next_obs, axis=1),
        obs=obs,
        next_obs=next_obs,
        actions=actions,
        rewards=rewards,
        terminal=(rng.random(size) < terminal_rate).astype(np.float64),
    )
    if seq_length is not None:
        windows = []
        for o in obs:
            window = rng.normal(size=(size, seq_length, o.shape[1]))
            window[:, -1] = o
            windows.append(window)
        batch.actor_inputs = windows
        batch.next_actor_inputs = [
            np.concatenate([w[:, 1:], o[:, None, :]], axis=1) for w, o in zip(windows, next_obs)
        ]
    return batch
