"""
Factored multi-agent critics.

Local critics Q_b(tau_b, u_b) feed a team mixer g(s, Q_1..Q_k) -> Q_tot. The TD
loss on Q_tot trains critics and mixer together; the policy step recomputes
every team member's action with its online actor and ascends Q_tot.

Gradient dictionaries here are keyed ``agent{k}.critic.<name>``,
``agent{k}.actor.<name>`` and ``mixer.<name>``.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from marl_avoidance.algos.ddpg import UpdateLosses, ensure_finite_loss, iddpg_update, td_target
from marl_avoidance.algos.nets import AgentNets, MixerNets, prefixed
from marl_avoidance.buffers import Batch
from marl_avoidance.errors import ConfigurationError, UnsupportedScenarioError
from marl_avoidance.logging import logger
from marl_avoidance.models.algo import AlgoConfig
from marl_avoidance.nn.mixers import mixer_backward, mixer_forward
from marl_avoidance.nn.mlp import Params, mlp_backward
from marl_avoidance.nn.optim import adam_step


@dataclass(frozen=True)
class CriticPlan:
    """
    Which critic scores which agent.

    own-critics runs one joint pass (owner None) where agent b is scored by
    critic b. simulate-with-own runs one pass per team member a, scoring every
    agent with critic a; that pass trains only critic a, the mixer and actor a.
    """

    mode: str

    def owners(self, team: Sequence[int]) -> List[Optional[int]]:
        return [None] if self.mode == "own-critics" else list(team)

    def scorer(self, owner: Optional[int], agent: int) -> int:
        return agent if owner is None else owner

    def trained(self, owner: Optional[int], team: Sequence[int]) -> List[int]:
        return list(team) if owner is None else [owner]


def facmac_sharing_mode(cfg: AlgoConfig) -> CriticPlan:
    return CriticPlan(mode=cfg.critic_sharing)


def check_shared_reward(batch: Batch, team: Sequence[int]) -> np.ndarray:
    rewards = batch.rewards[:, list(team)]
    if not np.all(rewards == rewards[:, :1]):
        raise UnsupportedScenarioError(
            "factored critics need one shared reward per team; rewards differ across agents"
        )
    return rewards[:, 0]


def _team_values(
    plan: CriticPlan,
    owner: Optional[int],
    team: Sequence[int],
    nets: Sequence[AgentNets],
    obs: Sequence[np.ndarray],
    actions: Sequence[np.ndarray],
    target: bool = False,
) -> Tuple[np.ndarray, list]:
    values, caches = [], []
    for b in team:
        x = np.concatenate([obs[b], actions[b]], axis=1)
        q, cache = nets[plan.scorer(owner, b)].q_value(x, target=target)
        values.append(q)
        caches.append(cache)
    return np.stack(values, axis=1), caches


def facmac_target(
    plan: CriticPlan,
    owner: Optional[int],
    mixer: MixerNets,
    batch: Batch,
    nets: Sequence[AgentNets],
    gamma: float,
) -> np.ndarray:
    team = mixer.team
    reward = check_shared_reward(batch, team)
    next_actions: Dict[int, np.ndarray] = {
        b: nets[b].act(batch.next_actor_input(b), target=True)[0] for b in team
    }
    qs_next, _ = _team_values(plan, owner, team, nets, batch.next_obs, next_actions, target=True)
    q_tot_next, _ = mixer_forward(mixer.kind, batch.next_state, qs_next, mixer.target)
    return td_target(reward, q_tot_next, gamma, batch.terminal)


def td_params(plan: CriticPlan, owner: Optional[int], mixer: MixerNets, nets: Sequence[AgentNets]) -> Params:
    params: Params = {}
    for k in plan.trained(owner, mixer.team):
        params.update(prefixed(nets[k].critic, f"agent{k}.critic."))
    params.update(prefixed(mixer.params, "mixer."))
    return params


def actor_params(plan: CriticPlan, owner: Optional[int], mixer: MixerNets, nets: Sequence[AgentNets]) -> Params:
    params: Params = {}
    for k in plan.trained(owner, mixer.team):
        params.update(prefixed(nets[k].actor, f"agent{k}.actor."))
    return params


def _accumulate(grads: Params, prefix: str, part: Params) -> None:
    for name, value in part.items():
        key = f"{prefix}{name}"
        grads[key] = grads[key] + value if key in grads else value


def facmac_td_loss(
    plan: CriticPlan,
    owner: Optional[int],
    mixer: MixerNets,
    batch: Batch,
    nets: Sequence[AgentNets],
    y: np.ndarray,
) -> Tuple[float, Params]:
    """Mean squared error of Q_tot against y, with gradients for critics and mixer."""
    team = mixer.team
    qs, caches = _team_values(plan, owner, team, nets, batch.obs, batch.actions)
    q_tot, mixer_cache = mixer_forward(mixer.kind, batch.state, qs, mixer.params)
    diff = q_tot - y
    loss = float(np.mean(diff * diff))
    dqs, mixer_grads = mixer_backward(mixer_cache, 2.0 * diff / diff.shape[0])
    grads = prefixed(mixer_grads, "mixer.")
    for j, b in enumerate(team):
        _, part = mlp_backward(caches[j], dqs[:, j : j + 1])
        _accumulate(grads, f"agent{plan.scorer(owner, b)}.critic.", part)
    return loss, grads


def facmac_actor_loss(
    plan: CriticPlan,
    owner: Optional[int],
    mixer: MixerNets,
    batch: Batch,
    nets: Sequence[AgentNets],
) -> Tuple[float, Params]:
    """Negated mean Q_tot with every team member's action recomputed by its online actor."""
    team = mixer.team
    actions: Dict[int, np.ndarray] = {}
    actor_caches = {}
    for b in team:
        actions[b], actor_caches[b] = nets[b].act(batch.actor_input(b))
    qs, caches = _team_values(plan, owner, team, nets, batch.obs, actions)
    q_tot, mixer_cache = mixer_forward(mixer.kind, batch.state, qs, mixer.params)
    size = q_tot.shape[0]
    loss = -float(np.mean(q_tot))
    dqs, _ = mixer_backward(mixer_cache, np.full(size, -1.0 / size))
    grads: Params = {}
    for j, b in enumerate(team):
        dx, _ = mlp_backward(caches[j], dqs[:, j : j + 1])
        obs_dim = batch.obs[b].shape[1]
        part = nets[b].actor_backward(actor_caches[b], dx[:, obs_dim:])
        _accumulate(grads, f"agent{b}.actor.", part)
    return loss, grads


def _unprefix(grads: Params, prefix: str) -> Params:
    return {name[len(prefix) :]: value for name, value in grads.items() if name.startswith(prefix)}


def _check_simulated_team(plan: CriticPlan, mixer: MixerNets, nets: Sequence[AgentNets]) -> None:
    if plan.mode != "simulate-with-own":
        return
    widths = {nets[b].critic_spec.input_dim for b in mixer.team}
    if len(widths) > 1:
        raise ConfigurationError(
            "simulate-with-own needs identical critic architectures inside a team", key="sharing"
        )


def facmac_update(
    batch: Batch, nets: Sequence[AgentNets], mixers: Sequence[MixerNets], cfg: AlgoConfig
) -> UpdateLosses:
    """One TD step on (critics, mixer) and one policy step per pass of the sharing plan, team by team."""
    plan = facmac_sharing_mode(cfg)
    critic_losses, objectives = [], []
    for mixer in mixers:
        _check_simulated_team(plan, mixer, nets)
        for owner in plan.owners(mixer.team):
            y = facmac_target(plan, owner, mixer, batch, nets, cfg.gamma)
            loss, grads = facmac_td_loss(plan, owner, mixer, batch, nets, y)
            ensure_finite_loss(loss, "factored critic loss")
            for k in plan.trained(owner, mixer.team):
                adam_step(nets[k].critic, _unprefix(grads, f"agent{k}.critic."), nets[k].critic_opt, cfg.lr_critic)
            if mixer.params:
                adam_step(mixer.params, _unprefix(grads, "mixer."), mixer.opt, cfg.lr_critic)
            critic_losses.append(loss)

            loss, grads = facmac_actor_loss(plan, owner, mixer, batch, nets)
            ensure_finite_loss(loss, "factored policy objective")
            for k in plan.trained(owner, mixer.team):
                adam_step(nets[k].actor, _unprefix(grads, f"agent{k}.actor."), nets[k].actor_opt, cfg.lr_actor)
            objectives.append(-loss)
    return UpdateLosses(float(np.mean(critic_losses)), float(np.mean(objectives)))


def in_first_stage(cfg: AlgoConfig, timestep: int) -> bool:
    return cfg.staged_watershed is not None and timestep < cfg.staged_watershed


def facmac_staged_update(
    batch: Batch,
    nets: Sequence[AgentNets],
    mixers: Sequence[MixerNets],
    cfg: AlgoConfig,
    timestep: int,
) -> UpdateLosses:
    """
    Before the watershed the mixer is frozen: every agent trains its local
    critic on its own TD loss and its actor through that critic alone.
    From the watershed on this is facmac_update.
    """
    if not in_first_stage(cfg, timestep):
        if cfg.staged_watershed is not None and timestep == cfg.staged_watershed:
            logger.info(f"Staged training reached the watershed at timestep {timestep}; mixer unfrozen")
        return facmac_update(batch, nets, mixers, cfg)
    losses = [iddpg_update(a, batch, nets, cfg) for a in range(len(nets))]
    return UpdateLosses(
        float(np.mean([loss.critic for loss in losses])),
        float(np.mean([loss.actor for loss in losses])),
    )
