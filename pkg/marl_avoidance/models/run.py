from typing import Dict, List, Literal, Optional

from pydantic import ConfigDict, Field, field_validator, model_validator

from marl_avoidance.models.algo import AlgoConfig, AlgorithmId, MixerId, RunMetadata, SharingMode
from marl_avoidance.models.base import StrictModel
from marl_avoidance.scenarios import SCENARIO_IDS

Scale = Literal["full", "desk"]


class RunConfig(StrictModel):
    """
    One experiment, keyed by the hyperparameter names used in config files.

    Python attribute names are snake_case; files and ``config.resolved`` use
    the aliases (``Lr-actor``, ``Batch-size``, ``eval-every`` ...).
    """

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    scenario: str = "spread-3a"
    algo: AlgorithmId = "maddpg"
    mixer: MixerId = "nonmonotonic"
    sharing: SharingMode = "own-critics"
    staged_watershed: Optional[int] = Field(default=None, alias="staged-watershed", ge=0)
    time_steps: int = Field(default=2_000_000, alias="time-steps", ge=0)
    max_episode_len: int = Field(default=100, alias="max-episode-len", ge=1)
    num_adversaries: Optional[int] = Field(default=None, alias="Num-adversaries", ge=0, validate_default=True)
    lr_actor: float = Field(default=0.001, alias="Lr-actor", gt=0)
    lr_critic: float = Field(default=0.01, alias="Lr-critic", gt=0)
    epsilon: float = Field(default=0.1, alias="Epsilon", ge=0, le=1)
    noise_rate: float = Field(default=0.1, alias="Noise-rate", ge=0)
    gamma: float = Field(default=0.95, alias="Gamma", ge=0, lt=1)
    batch_size: int = Field(default=256, alias="Batch-size", ge=1)
    seq_length: int = Field(default=5, alias="seq-length", ge=1)
    seed: int = Field(default=0, ge=0)
    eval_every: int = Field(default=5000, alias="eval-every", ge=1)
    eval_episodes: int = Field(default=10, alias="eval-episodes", ge=1)
    out: str = "runs/default"
    tau: float = Field(default=0.01, ge=0, le=1)
    buffer_capacity: int = Field(default=500_000, alias="buffer-capacity", ge=1)
    hidden_size: int = Field(default=64, alias="hidden-size", ge=1)
    lstm_hidden_size: int = Field(default=64, alias="lstm-hidden-size", ge=1)
    mixer_embed: int = Field(default=32, alias="mixer-embed", ge=1)
    wall_clock: bool = Field(default=False, alias="wall-clock")
    scale: Scale = "full"

    @field_validator("scenario")
    @classmethod
    def validate_scenario(cls, v):
        if v not in SCENARIO_IDS:
            raise ValueError(f"unknown scenario '{v}', expected one of {sorted(SCENARIO_IDS)}")
        return v

    @field_validator("algo")
    @classmethod
    def validate_algo(cls, v, info):
        scenario = info.data.get("scenario")
        if v == "facmac" and scenario is not None and SCENARIO_IDS[scenario][0] == "simple-tunnel":
            raise ValueError("facmac needs a shared reward and cannot run on simple-tunnel")
        return v

    @field_validator("num_adversaries")
    @classmethod
    def validate_num_adversaries(cls, v, info):
        scenario = info.data.get("scenario")
        if scenario is None:
            return v
        expected = 1 if SCENARIO_IDS[scenario][0] == "obstacle-predator-prey" else 0
        if v is None:
            return expected
        if v != expected:
            raise ValueError(f"{scenario} has {expected} adversaries, got {v}")
        return v

    @model_validator(mode="after")
    def check_capacity(self):
        if self.buffer_capacity < self.batch_size:
            raise ValueError("buffer-capacity must be at least Batch-size")
        return self

    @property
    def scenario_name(self) -> str:
        return SCENARIO_IDS[self.scenario][0]

    @property
    def n_agents(self) -> int:
        return SCENARIO_IDS[self.scenario][1]

    def algo_config(self) -> AlgoConfig:
        return AlgoConfig(
            algorithm=self.algo,
            gamma=self.gamma,
            lr_actor=self.lr_actor,
            lr_critic=self.lr_critic,
            batch_size=self.batch_size,
            seq_length=self.seq_length,
            mixer=self.mixer if self.algo == "facmac" else None,
            critic_sharing=self.sharing,
            staged_watershed=self.staged_watershed if self.algo == "facmac" else None,
            tau=self.tau,
            hidden=self.hidden_size,
            lstm_hidden=self.lstm_hidden_size,
            mixer_embed=self.mixer_embed,
        )

    def metadata(self) -> RunMetadata:
        return RunMetadata.from_config(self.algo_config())

    def to_resolved(self) -> Dict[str, object]:
        return self.model_dump(by_alias=True)


class MetricsRow(StrictModel):
    timestep: int = Field(ge=0)
    episode: int = Field(ge=0)
    agent_returns: List[float]
    mean_return: float
    wall_clock_s: float = Field(default=0.0, ge=0)


class EvaluationResult(StrictModel):
    per_agent: List[float]
    mean_return: float
    episode_returns: List[List[float]]


class RunArtifacts(StrictModel):
    out_dir: str
    metrics_path: str
    checkpoint_path: str
    resolved_path: str
    updates_done: int = Field(ge=0)
    rows: List[MetricsRow] = []


class CriterionResult(StrictModel):
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: Optional[str] = None


class VerifyReport(StrictModel):
    suite: str
    passed: bool
    criteria: List[CriterionResult]
