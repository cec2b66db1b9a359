from typing import List, Optional, Sequence, Tuple

import numpy as np

from marl_avoidance import physics
from marl_avoidance.errors import InputError
from marl_avoidance.models.scenario import ScenarioSpec
from marl_avoidance.models.world import WorldState
from marl_avoidance.scenarios import global_state, is_terminal, observe_all, reset_world, reward


class ParticleEnv:
    """
    Episode wrapper around a scenario: one action per learning agent, in learner order.

    Learners come first in the entity order and are exactly the movable
    entities, so actions map one-to-one onto physics forces.
    """

    def __init__(self, spec: ScenarioSpec, rng: np.random.Generator):
        self.spec = spec
        self.rng = rng
        self.world: Optional[WorldState] = None
        self.episodes_started = 0
        self.n_agents = spec.n_learners

    def _require_world(self) -> WorldState:
        if self.world is None:
            raise InputError("environment must be reset before use")
        return self.world

    def reset(self) -> List[np.ndarray]:
        self.world = reset_world(self.spec, self.rng, episode_index=self.episodes_started)
        self.episodes_started += 1
        return observe_all(self.world, self.spec)

    def state(self) -> np.ndarray:
        return global_state(self._require_world(), self.spec)

    def observations(self) -> List[np.ndarray]:
        return observe_all(self._require_world(), self.spec)

    def step(self, actions: Sequence[np.ndarray]) -> Tuple[List[np.ndarray], np.ndarray, bool]:
        before = self._require_world()
        forces = np.asarray(actions, dtype=np.float64).reshape(-1, 2)
        self.world = physics.step(before, forces, self.spec.world, self.spec.entities)
        rewards = reward(before, actions, self.world, self.spec)
        return observe_all(self.world, self.spec), rewards, is_terminal(self.world, self.spec)
