"""
Per-agent network containers and critic input layouts.

Critic input widths, with s the concatenation of all observations:

==============  ================  ==========================
algorithm       critic input      width
==============  ================  ==========================
maddpg(-lstm)   (s, u_1..u_n)     sum(d_obs) + n * d_act
maddpg-l        (s, u_a)          sum(d_obs) + d_act
iddpg, facmac   (tau_a, u_a)      d_obs_a + d_act
==============  ================  ==========================
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from marl_avoidance.errors import ShapeMismatchError
from marl_avoidance.models.algo import DEFAULT_MIXER, AlgoConfig
from marl_avoidance.nn.lstm import (
    LSTMActorSpec,
    init_lstm_actor,
    lstm_actor_backward,
    lstm_actor_forward,
)
from marl_avoidance.nn.mixers import init_mixer
from marl_avoidance.nn.mlp import MLPSpec, Params, init_mlp, mlp_backward, mlp_forward
from marl_avoidance.nn.optim import AdamState, copy_params

ACTION_DIM = 2


class CriticLayout(str, Enum):
    JOINT = "joint"
    STATE_OWN = "state-own"
    LOCAL = "local"


LAYOUTS = {
    "maddpg": CriticLayout.JOINT,
    "maddpg-lstm": CriticLayout.JOINT,
    "maddpg-l": CriticLayout.STATE_OWN,
    "iddpg": CriticLayout.LOCAL,
    "facmac": CriticLayout.LOCAL,
}


def critic_input_dim(layout: CriticLayout, obs_dims: Sequence[int], agent: int, act_dim: int = ACTION_DIM) -> int:
    if layout is CriticLayout.JOINT:
        return sum(obs_dims) + len(obs_dims) * act_dim
    if layout is CriticLayout.STATE_OWN:
        return sum(obs_dims) + act_dim
    return obs_dims[agent] + act_dim


def critic_inputs(
    layout: CriticLayout,
    state: np.ndarray,
    own_obs: np.ndarray,
    actions: Sequence[np.ndarray],
    agent: int,
) -> Tuple[np.ndarray, slice]:
    """Critic input rows plus the column slice holding agent's action."""
    if layout is CriticLayout.JOINT:
        start = state.shape[1] + ACTION_DIM * agent
        return np.concatenate([state] + list(actions), axis=1), slice(start, start + ACTION_DIM)
    if layout is CriticLayout.STATE_OWN:
        start = state.shape[1]
        return np.concatenate([state, actions[agent]], axis=1), slice(start, start + ACTION_DIM)
    start = own_obs.shape[1]
    return np.concatenate([own_obs, actions[agent]], axis=1), slice(start, start + ACTION_DIM)


ActorSpec = Union[MLPSpec, LSTMActorSpec]


@dataclass
class AgentNets:
    actor_spec: ActorSpec
    critic_spec: MLPSpec
    actor: Params
    critic: Params
    target_actor: Params
    target_critic: Params
    actor_opt: AdamState
    critic_opt: AdamState

    @property
    def recurrent(self) -> bool:
        return isinstance(self.actor_spec, LSTMActorSpec)

    def act(self, actor_input, target: bool = False) -> Tuple[np.ndarray, Any]:
        params = self.target_actor if target else self.actor
        if self.recurrent:
            return lstm_actor_forward(self.actor_spec, params, actor_input)
        return mlp_forward(self.actor_spec, params, actor_input)

    def actor_backward(self, cache, daction) -> Params:
        if self.recurrent:
            return lstm_actor_backward(cache, daction)[1]
        return mlp_backward(cache, daction)[1]

    def q_value(self, x: np.ndarray, target: bool = False, params: Optional[Params] = None):
        if x.shape[-1] != self.critic_spec.input_dim:
            raise ShapeMismatchError(
                f"critic expects {self.critic_spec.input_dim} inputs, got {x.shape[-1]}"
            )
        if params is None:
            params = self.target_critic if target else self.critic
        out, cache = mlp_forward(self.critic_spec, params, x)
        return out[:, 0], cache


def build_agent_nets(
    cfg: AlgoConfig, obs_dim: int, critic_in: int, rng: np.random.Generator
) -> AgentNets:
    if cfg.uses_windows:
        actor_spec: ActorSpec = LSTMActorSpec(
            input_dim=obs_dim, hidden=cfg.lstm_hidden, dense=cfg.hidden, output_dim=ACTION_DIM
        )
        actor = init_lstm_actor(actor_spec, rng)
    else:
        actor_spec = MLPSpec(widths=(obs_dim, cfg.hidden, cfg.hidden, ACTION_DIM), output_activation="tanh")
        actor = init_mlp(actor_spec, rng)
    critic_spec = MLPSpec(widths=(critic_in, cfg.hidden, cfg.hidden, 1))
    critic = init_mlp(critic_spec, rng)
    return AgentNets(
        actor_spec=actor_spec,
        critic_spec=critic_spec,
        actor=actor,
        critic=critic,
        target_actor=copy_params(actor),
        target_critic=copy_params(critic),
        actor_opt=AdamState.for_params(actor),
        critic_opt=AdamState.for_params(critic),
    )


@dataclass
class MixerNets:
    """Mixer parameters psi and target psi- for one team; vdn carries no parameters."""

    kind: str
    team: List[int]
    params: Params
    target: Params
    opt: AdamState


def build_mixer(cfg: AlgoConfig, team: List[int], state_dim: int, rng: np.random.Generator) -> MixerNets:
    kind = cfg.mixer or DEFAULT_MIXER
    params = {} if kind == "vdn" else init_mixer(state_dim, len(team), cfg.mixer_embed, rng)
    return MixerNets(
        kind=kind,
        team=list(team),
        params=params,
        target=copy_params(params),
        opt=AdamState.for_params(params),
    )


def prefixed(params: Params, prefix: str) -> Dict[str, np.ndarray]:
    """Same arrays under prefixed names; in-place edits reach the originals."""
    return {f"{prefix}{name}": value for name, value in params.items()}
