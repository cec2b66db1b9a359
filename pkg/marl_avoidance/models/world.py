from typing import List, Literal, Optional

import numpy as np
from pydantic import Field, field_validator, model_validator

from marl_avoidance.models.base import ArrayModel, FiniteArray, StrictModel

EntityKind = Literal["agent", "adversary", "landmark", "obstacle", "wall"]


class EntitySpec(StrictModel):
    radius: float = Field(gt=0, description="Disc radius in world units")
    movable: bool
    max_speed: Optional[float] = Field(default=None, description="Units per step, None = unbounded")
    accel: float = Field(default=1.0, gt=0, description="Force multiplier")
    kind: EntityKind
    collide: bool = True

    @field_validator("max_speed")
    @classmethod
    def validate_max_speed(cls, v):
        if v is not None and v <= 0:
            raise ValueError("max_speed must be positive or None")
        return v

    @model_validator(mode="after")
    def check_static_kinds(self):
        if self.kind in ("wall", "obstacle", "landmark") and self.movable:
            raise ValueError(f"{self.kind} entities must be immovable")
        return self


class Bounds(StrictModel):
    xmin: float = -1.0
    xmax: float = 1.0
    ymin: float = -1.0
    ymax: float = 1.0

    @model_validator(mode="after")
    def check_extent(self):
        if self.xmin >= self.xmax or self.ymin >= self.ymax:
            raise ValueError("bounds must have positive extent")
        return self


class WorldConfig(StrictModel):
    dt: float = Field(default=0.1, gt=0)
    damping: float = Field(default=0.25, ge=0, lt=1)
    contact_stiffness: float = Field(default=100.0, ge=0)
    contact_margin: float = Field(default=0.001, gt=0)
    bounds: Optional[Bounds] = None


class WorldState(ArrayModel):
    positions: FiniteArray
    velocities: FiniteArray
    step_index: int = Field(default=0, ge=0)
    episode_index: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def check_shapes(self):
        if self.positions.ndim != 2 or self.positions.shape[1] != 2:
            raise ValueError(f"positions must be (n, 2), got {self.positions.shape}")
        if self.velocities.shape != self.positions.shape:
            raise ValueError("positions and velocities must have identical shapes")
        return self

    @property
    def n_entities(self) -> int:
        return int(self.positions.shape[0])

    def speeds(self) -> np.ndarray:
        return np.linalg.norm(self.velocities, axis=1)


def radii_of(specs: List[EntitySpec]) -> np.ndarray:
    return np.array([spec.radius for spec in specs], dtype=np.float64)
