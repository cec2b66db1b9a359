"""
The four obstacle-avoidance environments.

Entity order inside a world is fixed: trained agents, adversaries, landmarks
(targets), obstacles. Observation layouts per scenario and role:

=====================  ==========  ==================================================
scenario               role        blocks (length)
=====================  ==========  ==================================================
spread, tunnel         agent       vel(2) pos(2) landmarks_rel(2L) others_rel(2(N-1))
simple-tunnel          agent       target_rel(2) vel(2) pos(2) landmarks_rel(2L)
                                   others_rel(2(N-1))
obstacle-predator-prey agent       vel(2) pos(2) obstacles_rel(2O) predators_rel(2(P-1))
                       (predator)  prey_rel(2) prey_vel(2)
obstacle-predator-prey adversary   vel(2) pos(2) obstacles_rel(2O) predators_rel(2P)
                       (prey)
=====================  ==========  ==================================================

These tables are the compatibility contract for checkpoints.
"""

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from marl_avoidance.errors import ConfigurationError
from marl_avoidance.logging import logger
from marl_avoidance.models.scenario import SUPPORTED_AGENT_COUNTS, ScenarioSpec
from marl_avoidance.models.world import Bounds, EntitySpec, WorldConfig, WorldState, radii_of
from marl_avoidance.physics import collision_matrix

# Command-line scenario ids -> (scenario name, trained agents)
SCENARIO_IDS: Dict[str, Tuple[str, int]] = {
    "obstacle-predator-prey": ("obstacle-predator-prey", 3),
    "spread-3a": ("spread", 3),
    "spread-6a": ("spread", 6),
    "spread-9a": ("spread", 9),
    "tunnel": ("tunnel", 3),
    "simple-tunnel": ("simple-tunnel", 3),
    "simple-tunnel-6a": ("simple-tunnel", 6),
}

AGENT_RADIUS = 0.05
PREDATOR_RADIUS = 0.075
PREY_RADIUS = 0.05
LANDMARK_RADIUS = 0.05
SPREAD_OBSTACLE_RADIUS = 0.2
SPREAD_OBSTACLES = 2
PREY_OBSTACLES = 2
TUNNEL_DISC_RADIUS = 0.2
TUNNEL_HALF_WIDTH = 0.15
TUNNEL_END_X = 0.85
# MPE default action sensitivity
NAVIGATION_ACCEL = 5.0


def resolve_scenario_id(scenario_id: str) -> Tuple[str, int]:
    if scenario_id not in SCENARIO_IDS:
        raise ConfigurationError(
            f"unknown scenario '{scenario_id}', expected one of {sorted(SCENARIO_IDS)}",
            key="scenario",
        )
    return SCENARIO_IDS[scenario_id]


def _navigator() -> EntitySpec:
    return EntitySpec(radius=AGENT_RADIUS, movable=True, accel=NAVIGATION_ACCEL, kind="agent")


def _landmark() -> EntitySpec:
    return EntitySpec(radius=LANDMARK_RADIUS, movable=False, kind="landmark", collide=False)


def _obstacle(radius: float) -> EntitySpec:
    return EntitySpec(radius=radius, movable=False, kind="obstacle")


def _column(n: int, x: float) -> List[List[float]]:
    return [[x, (k - (n - 1) / 2.0) * 0.2] for k in range(n)]


def tunnel_obstacle_positions() -> List[List[float]]:
    """Two blocks above and below a corridor along y=0, built from overlapping discs."""
    xs = [-0.4, -0.2, 0.0, 0.2, 0.4]
    edge = TUNNEL_HALF_WIDTH + TUNNEL_DISC_RADIUS
    rows = [edge, edge + 0.35]
    return [[x, sign * y] for sign in (1.0, -1.0) for y in rows for x in xs]


def build_spec(name: str, n_agents: int, max_episode_len: int = 100) -> ScenarioSpec:
    if name not in SUPPORTED_AGENT_COUNTS:
        raise ConfigurationError(f"unknown scenario '{name}'", key="scenario")
    if n_agents not in SUPPORTED_AGENT_COUNTS[name]:
        raise ConfigurationError(
            f"{name} supports {SUPPORTED_AGENT_COUNTS[name]} agents, got {n_agents}", key="n_agents"
        )

    if name == "obstacle-predator-prey":
        predators = [
            EntitySpec(radius=PREDATOR_RADIUS, movable=True, max_speed=1.0, accel=3.0, kind="agent")
            for _ in range(n_agents)
        ]
        prey = EntitySpec(radius=PREY_RADIUS, movable=True, max_speed=1.3, accel=4.0, kind="adversary")
        return ScenarioSpec(
            name=name,
            n_agents=n_agents,
            n_adversaries=1,
            n_obstacles=PREY_OBSTACLES,
            entities=predators + [prey] + [_obstacle(SPREAD_OBSTACLE_RADIUS)] * PREY_OBSTACLES,
            max_episode_len=max_episode_len,
        )

    if name == "spread":
        return ScenarioSpec(
            name=name,
            n_agents=n_agents,
            n_landmarks=n_agents,
            n_obstacles=SPREAD_OBSTACLES,
            entities=[_navigator() for _ in range(n_agents)]
            + [_landmark() for _ in range(n_agents)]
            + [_obstacle(SPREAD_OBSTACLE_RADIUS) for _ in range(SPREAD_OBSTACLES)],
            max_episode_len=max_episode_len,
        )

    obstacles = tunnel_obstacle_positions()
    simple = name == "simple-tunnel"
    return ScenarioSpec(
        name=name,
        n_agents=n_agents,
        n_landmarks=n_agents,
        n_obstacles=len(obstacles),
        entities=[_navigator() for _ in range(n_agents)]
        + [_landmark() for _ in range(n_agents)]
        + [_obstacle(TUNNEL_DISC_RADIUS) for _ in obstacles],
        spawn_positions=_column(n_agents, -TUNNEL_END_X),
        landmark_positions=_column(n_agents, TUNNEL_END_X),
        obstacle_positions=obstacles,
        designated_targets=simple,
        world=WorldConfig(bounds=Bounds()) if simple else WorldConfig(),
        max_episode_len=max_episode_len,
    )


def _canonical(points: np.ndarray) -> np.ndarray:
    if len(points) == 0:
        return points
    order = np.lexsort((points[:, 1], points[:, 0]))
    return points[order]


def compose_world(
    spec: ScenarioSpec,
    learner_positions: Sequence,
    landmark_positions: Sequence = (),
    obstacle_positions: Sequence = (),
    velocities: Optional[np.ndarray] = None,
    step_index: int = 0,
    episode_index: int = 0,
) -> WorldState:
    """
    Assemble a world from per-kind positions.

    Without designated targets, landmarks and obstacles are stored in
    lexicographic (x, y) order so creation order never leaks into observations.
    """
    learners = np.asarray(learner_positions, dtype=np.float64).reshape(-1, 2)
    landmarks = np.asarray(landmark_positions, dtype=np.float64).reshape(-1, 2)
    obstacles = np.asarray(obstacle_positions, dtype=np.float64).reshape(-1, 2)
    if not spec.designated_targets:
        landmarks = _canonical(landmarks)
        obstacles = _canonical(obstacles)
    positions = np.concatenate([learners, landmarks, obstacles], axis=0)
    if positions.shape[0] != len(spec.entities):
        raise ConfigurationError(
            f"{positions.shape[0]} positions for {len(spec.entities)} entities", key="positions"
        )
    if velocities is None:
        velocities = np.zeros_like(positions)
    return WorldState(
        positions=positions,
        velocities=velocities,
        step_index=step_index,
        episode_index=episode_index,
    )


def reset_world(spec: ScenarioSpec, rng: np.random.Generator, episode_index: int = 0) -> WorldState:
    """Start a new episode; random draws happen in the order learners, landmarks, obstacles."""
    if spec.spawn_positions is not None:
        learners = np.array(spec.spawn_positions)
    else:
        learners = rng.uniform(-1.0, 1.0, size=(spec.n_learners, 2))
    if spec.landmark_positions is not None:
        landmarks = np.array(spec.landmark_positions).reshape(-1, 2)
    else:
        landmarks = rng.uniform(-0.9, 0.9, size=(spec.n_landmarks, 2))
    if spec.obstacle_positions is not None:
        obstacles = np.array(spec.obstacle_positions).reshape(-1, 2)
    else:
        spread = 0.6 if spec.name == "spread" else 0.9
        obstacles = rng.uniform(-spread, spread, size=(spec.n_obstacles, 2))
    return compose_world(spec, learners, landmarks, obstacles, episode_index=episode_index)


def make_scenario(
    name: str, n_agents: int, seed: int, max_episode_len: int = 100
) -> Tuple[ScenarioSpec, WorldState]:
    spec = build_spec(name, n_agents, max_episode_len=max_episode_len)
    world = reset_world(spec, np.random.default_rng(seed))
    logger.debug(f"Scenario {name} with {n_agents} agents built from seed {seed}")
    return spec, world


def observation_layout(spec: ScenarioSpec) -> Dict[str, List[Tuple[str, int]]]:
    n, n_landmarks, n_obstacles = spec.n_agents, spec.n_landmarks, spec.n_obstacles
    if spec.name == "obstacle-predator-prey":
        return {
            "agent": [
                ("vel", 2),
                ("pos", 2),
                ("obstacles_rel", 2 * n_obstacles),
                ("predators_rel", 2 * (n - 1)),
                ("prey_rel", 2 * spec.n_adversaries),
                ("prey_vel", 2 * spec.n_adversaries),
            ],
            "adversary": [
                ("vel", 2),
                ("pos", 2),
                ("obstacles_rel", 2 * n_obstacles),
                ("predators_rel", 2 * n),
            ],
        }
    blocks = [("vel", 2), ("pos", 2), ("landmarks_rel", 2 * n_landmarks), ("others_rel", 2 * (n - 1))]
    if spec.designated_targets:
        blocks = [("target_rel", 2)] + blocks
    return {"agent": blocks}


def role_of(spec: ScenarioSpec, agent_index: int) -> str:
    return "adversary" if agent_index >= spec.n_agents else "agent"


def observation_dims(spec: ScenarioSpec) -> List[int]:
    layout = observation_layout(spec)
    return [sum(length for _, length in layout[role_of(spec, i)]) for i in spec.learner_indices]


def observe(world: WorldState, agent_index: int, spec: ScenarioSpec) -> np.ndarray:
    if agent_index not in spec.learner_indices:
        raise ConfigurationError(f"no learning agent with index {agent_index}", key="agent_index")
    pos = world.positions
    vel = world.velocities
    own = pos[agent_index]

    def rel(indices: Sequence[int]) -> np.ndarray:
        return (pos[list(indices)] - own).ravel()

    if spec.name == "obstacle-predator-prey":
        predators = spec.agent_indices
        if agent_index in predators:
            others = [i for i in predators if i != agent_index]
            blocks = [
                vel[agent_index],
                own,
                rel(spec.obstacle_indices),
                rel(others),
                rel(spec.adversary_indices),
                vel[spec.adversary_indices].ravel(),
            ]
        else:
            blocks = [vel[agent_index], own, rel(spec.obstacle_indices), rel(predators)]
    else:
        others = [i for i in spec.agent_indices if i != agent_index]
        blocks = [vel[agent_index], own, rel(spec.landmark_indices), rel(others)]
        if spec.designated_targets:
            target = spec.landmark_indices[agent_index]
            blocks = [pos[target] - own] + blocks
    return np.concatenate(blocks)


def observe_all(world: WorldState, spec: ScenarioSpec) -> List[np.ndarray]:
    return [observe(world, i, spec) for i in spec.learner_indices]


def global_state(world: WorldState, spec: ScenarioSpec) -> np.ndarray:
    """Concatenation of every learning agent's observation, in agent order."""
    return np.concatenate(observe_all(world, spec))


def _boundary_penalty(position: np.ndarray) -> float:
    penalty = 0.0
    for x in np.abs(position):
        if x < 0.9:
            continue
        if x < 1.0:
            penalty += (x - 0.9) * 10.0
        else:
            penalty += min(float(np.exp(2.0 * x - 2.0)), 10.0)
    return penalty


def _pair_events(hit: np.ndarray, group_a: Sequence[int], group_b: Sequence[int]) -> int:
    """Collision events between two groups; pairs inside one group are counted once."""
    block = hit[np.ix_(list(group_a), list(group_b))]
    if list(group_a) == list(group_b):
        return int(np.triu(block, k=1).sum())
    return int(block.sum())


def reward(
    world_before: WorldState,
    actions: Optional[Sequence[np.ndarray]],
    world_after: WorldState,
    spec: ScenarioSpec,
) -> np.ndarray:
    """Per-learner reward for the transition world_before -> world_after."""
    params = spec.reward_params
    pos = world_after.positions
    hit = collision_matrix(pos, radii_of(spec.entities))
    agents, obstacles = spec.agent_indices, spec.obstacle_indices

    if spec.name == "obstacle-predator-prey":
        preys = spec.adversary_indices
        gap = np.linalg.norm(pos[agents][:, None, :] - pos[preys][None, :, :], axis=-1)
        closest = gap.min(axis=0)
        captures = hit[np.ix_(agents, preys)]
        predator_events = _pair_events(hit, agents, agents) + _pair_events(hit, agents, obstacles)
        predator = (
            params.capture_bonus * captures.sum()
            - params.shaping * closest.sum()
            - params.collision_penalty * predator_events
        )
        rewards = [float(predator)] * len(agents)
        for k, y in enumerate(preys):
            prey = (
                params.shaping * closest[k]
                - params.capture_bonus * captures[:, k].sum()
                - _boundary_penalty(pos[y])
                - params.collision_penalty * _pair_events(hit, [y], obstacles)
            )
            rewards.append(float(prey))
        return np.array(rewards)

    landmarks = spec.landmark_indices
    if spec.designated_targets:
        gap = np.linalg.norm(pos[agents] - pos[landmarks], axis=1)
        own_hits = hit[np.ix_(agents, agents)].sum(axis=1) + hit[np.ix_(agents, obstacles)].sum(axis=1)
        return -gap - params.collision_penalty * own_hits

    gap = np.linalg.norm(pos[landmarks][:, None, :] - pos[agents][None, :, :], axis=-1)
    coverage = gap.min(axis=1).sum()
    events = _pair_events(hit, agents, agents) + _pair_events(hit, agents, obstacles)
    shared = -coverage - params.collision_penalty * events
    return np.full(len(agents), shared, dtype=np.float64)


def is_terminal(world: WorldState, spec: ScenarioSpec) -> bool:
    return world.step_index >= spec.max_episode_len
