from typing import List, Optional

import numpy as np
from pydantic import BaseModel

from marl_avoidance.algos.learner import MultiAgentLearner
from marl_avoidance.buffers import Batch
from marl_avoidance.harness.oracles import random_batch
from marl_avoidance.models.algo import AlgoConfig
from marl_avoidance.models.run import RunConfig
from marl_avoidance.models.transitions import Transition


class HelloModel(BaseModel):
    key1: str
    key2: int


def tiny_config(algorithm: str, **overrides) -> AlgoConfig:
    values = {"algorithm": algorithm, "hidden": 8, "lstm_hidden": 6, "mixer_embed": 4}
    values.update(overrides)
    return AlgoConfig(**values)


def tiny_learner(algorithm: str, obs_dims: List[int], seed: int = 0, teams=None, **overrides) -> MultiAgentLearner:
    teams = teams if teams is not None else [list(range(len(obs_dims)))]
    return MultiAgentLearner(tiny_config(algorithm, **overrides), obs_dims, teams, np.random.default_rng(seed))


def synthetic_batch(
    obs_dims: List[int], size: int = 8, seed: int = 0, shared_reward: bool = False, seq_length: Optional[int] = None
) -> Batch:
    return random_batch(np.random.default_rng(seed), obs_dims, size, shared_reward=shared_reward, seq_length=seq_length)


def make_transition(step_index: int = 0, episode_index: int = 0, n_agents: int = 1, value: float = 0.0) -> Transition:
    row = np.full(2, value)
    return Transition(
        state=row,
        next_state=row + 1.0,
        obs=[row] * n_agents,
        next_obs=[row + 1.0] * n_agents,
        actions=[np.zeros(2)] * n_agents,
        rewards=[0.0] * n_agents,
        terminal=False,
        step_index=step_index,
        episode_index=episode_index,
    )


def tiny_run(out_dir: str, **overrides) -> RunConfig:
    values = {
        "scenario": "spread-3a",
        "algo": "maddpg",
        "time-steps": 60,
        "max-episode-len": 10,
        "Batch-size": 16,
        "buffer-capacity": 200,
        "eval-every": 20,
        "eval-episodes": 1,
        "hidden-size": 8,
        "lstm-hidden-size": 6,
        "mixer-embed": 4,
        "seq-length": 3,
        "seed": 1,
        "out": out_dir,
    }
    values.update(overrides)
    return RunConfig.model_validate(values)
