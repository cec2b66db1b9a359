from typing import Dict, List, Sequence

import numpy as np

from marl_avoidance.algos.ddpg import (
    UpdateLosses,
    iddpg_update,
    lstmactor_update,
    maddpg_l_update,
    maddpg_update,
)
from marl_avoidance.algos.facmac import facmac_staged_update, facmac_update, in_first_stage
from marl_avoidance.algos.nets import (
    LAYOUTS,
    AgentNets,
    MixerNets,
    build_agent_nets,
    build_mixer,
    critic_input_dim,
)
from marl_avoidance.buffers import Batch
from marl_avoidance.errors import CheckpointIncompatibleError
from marl_avoidance.logging import logger
from marl_avoidance.models.algo import AlgoConfig, RunMetadata
from marl_avoidance.nn.optim import soft_update

_PER_AGENT = {
    "iddpg": iddpg_update,
    "maddpg": maddpg_update,
    "maddpg-l": maddpg_l_update,
    "maddpg-lstm": lstmactor_update,
}


class MultiAgentLearner:
    """
    All trained agents of one run.

    Agents update in index order, critic before actor; target networks follow
    with one soft update per training step.
    """

    def __init__(
        self,
        cfg: AlgoConfig,
        obs_dims: Sequence[int],
        teams: Sequence[Sequence[int]],
        rng: np.random.Generator,
    ):
        self.cfg = cfg
        self.obs_dims = list(obs_dims)
        self.teams = [list(team) for team in teams]
        self.layout = LAYOUTS[cfg.algorithm]
        self.nets: List[AgentNets] = [
            build_agent_nets(cfg, dim, critic_input_dim(self.layout, self.obs_dims, a), rng)
            for a, dim in enumerate(self.obs_dims)
        ]
        self.mixers: List[MixerNets] = []
        if cfg.algorithm == "facmac":
            state_dim = sum(self.obs_dims)
            self.mixers = [build_mixer(cfg, team, state_dim, rng) for team in self.teams]
        self.updates_done = 0
        logger.debug(
            f"Built {cfg.algorithm} learner for {len(self.nets)} agents, critic widths "
            f"{[net.critic_spec.input_dim for net in self.nets]}"
        )

    @property
    def n_agents(self) -> int:
        return len(self.nets)

    @property
    def metadata(self) -> RunMetadata:
        return RunMetadata.from_config(self.cfg)

    def act(self, actor_inputs: Sequence[np.ndarray]) -> List[np.ndarray]:
        """Deterministic actions, one per agent, from observations or observation windows."""
        return [net.act(x)[0] for net, x in zip(self.nets, actor_inputs)]

    def update(self, batch: Batch, timestep: int) -> UpdateLosses:
        algorithm = self.cfg.algorithm
        if algorithm == "facmac":
            if self.cfg.staged_watershed is not None:
                losses = facmac_staged_update(batch, self.nets, self.mixers, self.cfg, timestep)
            else:
                losses = facmac_update(batch, self.nets, self.mixers, self.cfg)
        else:
            rule = _PER_AGENT[algorithm]
            per_agent = [rule(a, batch, self.nets, self.cfg) for a in range(self.n_agents)]
            losses = UpdateLosses(
                float(np.mean([loss.critic for loss in per_agent])),
                float(np.mean([loss.actor for loss in per_agent])),
            )
        frozen_mixers = algorithm == "facmac" and in_first_stage(self.cfg, timestep)
        self.soft_update_targets(include_mixers=not frozen_mixers)
        self.updates_done += 1
        return losses

    def soft_update_targets(self, include_mixers: bool = True) -> None:
        tau = self.cfg.tau
        for net in self.nets:
            soft_update(net.target_actor, net.actor, tau)
            soft_update(net.target_critic, net.critic, tau)
        if include_mixers:
            for mixer in self.mixers:
                soft_update(mixer.target, mixer.params, tau)

    def state_arrays(self) -> Dict[str, np.ndarray]:
        """Every online and target parameter under a stable name; optimizer moments are not included."""
        arrays: Dict[str, np.ndarray] = {}
        for a, net in enumerate(self.nets):
            for part in ("actor", "critic", "target_actor", "target_critic"):
                for name, value in getattr(net, part).items():
                    arrays[f"agent{a}.{part}.{name}"] = value
        for t, mixer in enumerate(self.mixers):
            for part in ("params", "target"):
                for name, value in getattr(mixer, part).items():
                    arrays[f"mixer{t}.{part}.{name}"] = value
        return arrays

    def load_arrays(self, arrays: Dict[str, np.ndarray]) -> None:
        current = self.state_arrays()
        if set(current) != set(arrays):
            missing = sorted(set(current) - set(arrays))[:5]
            unexpected = sorted(set(arrays) - set(current))[:5]
            raise CheckpointIncompatibleError(
                f"parameter names differ (missing {missing}, unexpected {unexpected})"
            )
        for name, value in arrays.items():
            if value.shape != current[name].shape:
                raise CheckpointIncompatibleError(
                    f"'{name}' has shape {value.shape}, expected {current[name].shape}"
                )
        for name, value in arrays.items():
            current[name][...] = value
