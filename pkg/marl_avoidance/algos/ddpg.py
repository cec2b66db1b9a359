"""
Per-agent deterministic policy-gradient updates: IDDPG, MADDPG, MADDPG-L and
the LSTM-actor variant of MADDPG.

Every update is one critic step followed by one actor step for a single agent.
Losses are exposed as pure ``(loss, grads)`` functions so they can be checked
against finite differences; the ``*_update`` wrappers add the Adam step.
Target networks are only read here.
"""

from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from marl_avoidance.algos.nets import AgentNets, CriticLayout, critic_inputs
from marl_avoidance.buffers import Batch
from marl_avoidance.errors import InputError, TrainingDivergedError
from marl_avoidance.models.algo import AlgoConfig
from marl_avoidance.nn.mlp import Params, mlp_backward
from marl_avoidance.nn.optim import adam_step


class UpdateLosses(NamedTuple):
    critic: float
    actor: float


def td_target(reward, next_value, gamma: float, terminal) -> np.ndarray:
    """y = r + gamma * Q' * (1 - terminal)."""
    mask = 1.0 - np.asarray(terminal, dtype=np.float64)
    return np.asarray(reward, dtype=np.float64) + gamma * np.asarray(next_value, dtype=np.float64) * mask


def ensure_finite_loss(value: float, what: str) -> float:
    if not np.isfinite(value):
        raise TrainingDivergedError(f"{what} became non-finite ({value})")
    return float(value)


def target_actions(batch: Batch, nets: Sequence[AgentNets], agents: Sequence[int]) -> List[Optional[np.ndarray]]:
    """Target-actor actions on the next observations (or windows) for the listed agents."""
    actions: List[Optional[np.ndarray]] = [None] * len(nets)
    for b in agents:
        actions[b] = nets[b].act(batch.next_actor_input(b), target=True)[0]
    return actions


def critic_target(agent: int, batch: Batch, nets: Sequence[AgentNets], gamma: float, layout: CriticLayout) -> np.ndarray:
    agents = range(len(nets)) if layout is CriticLayout.JOINT else [agent]
    next_actions = target_actions(batch, nets, agents)
    x_next, _ = critic_inputs(layout, batch.next_state, batch.next_obs[agent], next_actions, agent)
    q_next, _ = nets[agent].q_value(x_next, target=True)
    return td_target(batch.rewards[:, agent], q_next, gamma, batch.terminal)


def critic_loss(agent: int, batch: Batch, nets: Sequence[AgentNets], y: np.ndarray, layout: CriticLayout) -> Tuple[float, Params]:
    """Mean squared TD error of agent's critic on the stored joint action."""
    x, _ = critic_inputs(layout, batch.state, batch.obs[agent], batch.actions, agent)
    q, cache = nets[agent].q_value(x)
    diff = q - y
    loss = float(np.mean(diff * diff))
    _, grads = mlp_backward(cache, (2.0 * diff / diff.shape[0])[:, None])
    return loss, grads


def actor_loss(agent: int, batch: Batch, nets: Sequence[AgentNets], layout: CriticLayout) -> Tuple[float, Params]:
    """
    Negated mean Q with agent's action recomputed by its online actor.

    Other agents' actions stay exactly as stored in the batch.
    """
    own = nets[agent]
    action, actor_cache = own.act(batch.actor_input(agent))
    actions = list(batch.actions)
    actions[agent] = action
    x, columns = critic_inputs(layout, batch.state, batch.obs[agent], actions, agent)
    q, critic_cache = own.q_value(x)
    loss = -float(np.mean(q))
    dx, _ = mlp_backward(critic_cache, np.full((q.shape[0], 1), -1.0 / q.shape[0]))
    return loss, own.actor_backward(actor_cache, dx[:, columns])


def critic_update(agent: int, batch: Batch, nets: Sequence[AgentNets], cfg: AlgoConfig, layout: CriticLayout) -> float:
    y = critic_target(agent, batch, nets, cfg.gamma, layout)
    loss, grads = critic_loss(agent, batch, nets, y, layout)
    ensure_finite_loss(loss, f"critic loss of agent {agent}")
    adam_step(nets[agent].critic, grads, nets[agent].critic_opt, cfg.lr_critic)
    return loss


def actor_update(agent: int, batch: Batch, nets: Sequence[AgentNets], cfg: AlgoConfig, layout: CriticLayout) -> float:
    loss, grads = actor_loss(agent, batch, nets, layout)
    ensure_finite_loss(loss, f"actor objective of agent {agent}")
    adam_step(nets[agent].actor, grads, nets[agent].actor_opt, cfg.lr_actor)
    return -loss


def maddpg_critic_update(agent: int, batch: Batch, nets: Sequence[AgentNets], cfg: AlgoConfig) -> float:
    return critic_update(agent, batch, nets, cfg, CriticLayout.JOINT)


def maddpg_actor_update(agent: int, batch: Batch, nets: Sequence[AgentNets], cfg: AlgoConfig) -> float:
    return actor_update(agent, batch, nets, cfg, CriticLayout.JOINT)


def maddpg_update(agent: int, batch: Batch, nets: Sequence[AgentNets], cfg: AlgoConfig) -> UpdateLosses:
    critic = maddpg_critic_update(agent, batch, nets, cfg)
    return UpdateLosses(critic, maddpg_actor_update(agent, batch, nets, cfg))


def iddpg_update(agent: int, batch: Batch, nets: Sequence[AgentNets], cfg: AlgoConfig) -> UpdateLosses:
    critic = critic_update(agent, batch, nets, cfg, CriticLayout.LOCAL)
    return UpdateLosses(critic, actor_update(agent, batch, nets, cfg, CriticLayout.LOCAL))


def maddpg_l_update(agent: int, batch: Batch, nets: Sequence[AgentNets], cfg: AlgoConfig) -> UpdateLosses:
    """Lightweight critic over (s, u_a); the TD target needs only agent's own target action."""
    critic = critic_update(agent, batch, nets, cfg, CriticLayout.STATE_OWN)
    return UpdateLosses(critic, actor_update(agent, batch, nets, cfg, CriticLayout.STATE_OWN))


def lstmactor_update(agent: int, batch: Batch, nets: Sequence[AgentNets], cfg: AlgoConfig) -> UpdateLosses:
    """MADDPG update where actors unroll over stored windows; the critic sees the final transition."""
    if batch.actor_inputs is None or batch.next_actor_inputs is None:
        raise InputError("LSTM-actor updates need windowed batches")
    if batch.actor_inputs[agent].ndim != 3 or batch.actor_inputs[agent].shape[1] < 1:
        raise InputError("observation windows must hold at least one step")
    return maddpg_update(agent, batch, nets, cfg)
