from typing import Dict, List, Literal, Optional

from pydantic import Field, field_validator, model_validator

from marl_avoidance.models.base import ArrayModel, StrictModel, Vec2
from marl_avoidance.models.world import EntitySpec, WorldConfig

ScenarioName = Literal["obstacle-predator-prey", "spread", "tunnel", "simple-tunnel"]

SUPPORTED_AGENT_COUNTS: Dict[str, List[int]] = {
    "obstacle-predator-prey": [3],
    "spread": [3, 6, 9],
    "tunnel": [3, 6],
    "simple-tunnel": [3, 6],
}


class RewardParams(StrictModel):
    collision_penalty: float = Field(default=1.0, ge=0)
    capture_bonus: float = Field(default=10.0, ge=0)
    shaping: float = Field(default=0.1, ge=0)


class ScenarioSpec(ArrayModel):
    name: ScenarioName
    n_agents: int = Field(ge=1)
    n_adversaries: int = Field(default=0, ge=0)
    n_landmarks: int = Field(default=0, ge=0)
    n_obstacles: int = Field(default=0, ge=0)
    entities: List[EntitySpec]
    spawn_positions: Optional[List[Vec2]] = None
    landmark_positions: Optional[List[Vec2]] = None
    obstacle_positions: Optional[List[Vec2]] = None
    designated_targets: bool = False
    reward_params: RewardParams = RewardParams()
    world: WorldConfig = WorldConfig()
    max_episode_len: int = Field(default=100, ge=1)

    @field_validator("n_adversaries")
    @classmethod
    def validate_adversaries(cls, v, info):
        name = info.data.get("name")
        expected = 1 if name == "obstacle-predator-prey" else 0
        if v != expected:
            raise ValueError(f"{name} has exactly {expected} adversaries")
        return v

    @model_validator(mode="after")
    def check_layout(self):
        allowed = SUPPORTED_AGENT_COUNTS[self.name]
        if self.n_agents not in allowed:
            raise ValueError(f"{self.name} supports n_agents in {allowed}, got {self.n_agents}")
        expected = self.n_learners + self.n_landmarks + self.n_obstacles
        if len(self.entities) != expected:
            raise ValueError(f"expected {expected} entity specs, got {len(self.entities)}")
        for i in self.learner_indices:
            if not self.entities[i].movable:
                raise ValueError("learning agents must be movable")
        if self.name in ("tunnel", "simple-tunnel"):
            if None in (self.spawn_positions, self.landmark_positions, self.obstacle_positions):
                raise ValueError(f"{self.name} requires fixed spawn, target and obstacle positions")
        if self.designated_targets and self.n_landmarks != self.n_agents:
            raise ValueError("designated targets need one landmark per agent")
        return self

    @property
    def n_learners(self) -> int:
        return self.n_agents + self.n_adversaries

    @property
    def learner_indices(self) -> List[int]:
        return list(range(self.n_learners))

    @property
    def agent_indices(self) -> List[int]:
        return list(range(self.n_agents))

    @property
    def adversary_indices(self) -> List[int]:
        return list(range(self.n_agents, self.n_learners))

    @property
    def landmark_indices(self) -> List[int]:
        start = self.n_learners
        return list(range(start, start + self.n_landmarks))

    @property
    def obstacle_indices(self) -> List[int]:
        start = self.n_learners + self.n_landmarks
        return list(range(start, start + self.n_obstacles))

    @property
    def teams(self) -> List[List[int]]:
        teams = [self.agent_indices]
        if self.n_adversaries:
            teams.append(self.adversary_indices)
        return teams

    @property
    def cooperative(self) -> bool:
        """True when every trained agent receives one shared reward."""
        return self.name != "simple-tunnel"
