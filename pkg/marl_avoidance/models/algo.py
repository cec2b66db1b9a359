from typing import Literal, Optional

from pydantic import Field, model_validator

from marl_avoidance.models.base import StrictModel

AlgorithmId = Literal["iddpg", "maddpg", "maddpg-lstm", "maddpg-l", "facmac"]
MixerId = Literal["vdn", "monotonic", "nonmonotonic"]
SharingMode = Literal["own-critics", "simulate-with-own"]

ALGORITHMS = ("iddpg", "maddpg", "maddpg-lstm", "maddpg-l", "facmac")
DEFAULT_MIXER: MixerId = "nonmonotonic"


class AlgoConfig(StrictModel):
    algorithm: AlgorithmId
    gamma: float = Field(default=0.95, ge=0, lt=1)
    lr_actor: float = Field(default=0.001, gt=0)
    lr_critic: float = Field(default=0.01, gt=0)
    batch_size: int = Field(default=256, ge=1)
    seq_length: int = Field(default=1, ge=1)
    mixer: Optional[MixerId] = None
    critic_sharing: SharingMode = "own-critics"
    staged_watershed: Optional[int] = Field(default=None, ge=0)
    tau: float = Field(default=0.01, ge=0, le=1)
    hidden: int = Field(default=64, ge=1)
    lstm_hidden: int = Field(default=64, ge=1)
    mixer_embed: int = Field(default=32, ge=1)

    @model_validator(mode="after")
    def check_facmac_fields(self):
        if self.algorithm != "facmac":
            if self.mixer is not None:
                raise ValueError(f"mixer is only used by facmac, not {self.algorithm}")
            if self.staged_watershed is not None:
                raise ValueError(f"staged-watershed is only used by facmac, not {self.algorithm}")
        elif self.mixer is None:
            self.mixer = DEFAULT_MIXER
        return self

    @property
    def uses_windows(self) -> bool:
        return self.algorithm == "maddpg-lstm"


class RunMetadata(StrictModel):
    """Identifies how a set of networks was trained; embedded in metrics and checkpoints."""

    algorithm: AlgorithmId
    mixer: Optional[MixerId] = None
    critic_sharing: Optional[SharingMode] = None
    staged_watershed: Optional[int] = None

    @classmethod
    def from_config(cls, cfg: AlgoConfig) -> "RunMetadata":
        if cfg.algorithm != "facmac":
            return cls(algorithm=cfg.algorithm)
        return cls(
            algorithm=cfg.algorithm,
            mixer=cfg.mixer,
            critic_sharing=cfg.critic_sharing,
            staged_watershed=cfg.staged_watershed,
        )
