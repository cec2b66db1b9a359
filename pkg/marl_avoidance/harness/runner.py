"""
Training and evaluation loops.

A run is one sequential loop over ``time-steps`` environment steps. Episodes
reset every ``max-episode-len`` steps; updates start once the replay buffer
holds a full batch; evaluations run every ``eval-every`` steps with
noise-free actors on a fixed evaluation stream.
"""

import os
import time
from collections import deque
from typing import Deque, List, Optional

import numpy as np
import yaml
from pydantic import ValidationError

from marl_avoidance.algos.learner import MultiAgentLearner
from marl_avoidance.buffers import (
    ReplayBuffer,
    SequenceBuffer,
    acting_window,
    collate_transitions,
    collate_windows,
    explore,
)
from marl_avoidance.env import ParticleEnv
from marl_avoidance.errors import CheckpointIncompatibleError, TrainingDivergedError
from marl_avoidance.harness.checkpoint import CHECKPOINT_NAME, checkpoint_load, checkpoint_save
from marl_avoidance.harness.metrics import MetricsWriter
from marl_avoidance.harness.run_config import write_resolved
from marl_avoidance.harness.seeding import SeedStreams
from marl_avoidance.logging import attach_file_handler, detach_file_handlers, logger
from marl_avoidance.models.base import compute_digest, params_digest
from marl_avoidance.models.run import EvaluationResult, MetricsRow, RunArtifacts, RunConfig
from marl_avoidance.models.scenario import ScenarioSpec
from marl_avoidance.models.transitions import Transition
from marl_avoidance.scenarios import build_spec, observation_dims, observation_layout, resolve_scenario_id
from marl_avoidance.utils import to_plain

METRICS_NAME = "metrics.csv"
LOG_NAME = "train.log"
DIAGNOSTIC_NAME = "diagnostic.yaml"


class LearnerPolicy:
    """Noise-free actions from a learner; keeps the episode's observation history for LSTM actors."""

    def __init__(self, learner: MultiAgentLearner):
        self.learner = learner
        self.seq_length = learner.cfg.seq_length if learner.cfg.uses_windows else 1
        self._history: Deque[List[np.ndarray]] = deque(maxlen=self.seq_length)

    def reset(self) -> None:
        self._history.clear()

    def __call__(self, obs: List[np.ndarray]) -> List[np.ndarray]:
        if not self.learner.cfg.uses_windows:
            return self.learner.act(obs)
        self._history.append(obs)
        steps = list(self._history)
        steps = [steps[0]] * (self.seq_length - len(steps)) + steps
        windows = [np.stack([step[a] for step in steps]) for a in range(len(obs))]
        return self.learner.act(windows)


class StationaryPolicy:
    """Zero force for every agent."""

    def reset(self) -> None:
        pass

    def __call__(self, obs: List[np.ndarray]) -> List[np.ndarray]:
        return [np.zeros(2) for _ in obs]


class RandomPolicy:
    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def reset(self) -> None:
        pass

    def __call__(self, obs: List[np.ndarray]) -> List[np.ndarray]:
        return [self.rng.uniform(-1.0, 1.0, size=2) for _ in obs]


def run_episodes(spec: ScenarioSpec, policy, episodes: int, rng: np.random.Generator) -> np.ndarray:
    """Undiscounted per-learner returns, shape (episodes, n_learners)."""
    env = ParticleEnv(spec, rng)
    returns = np.zeros((episodes, spec.n_learners))
    for episode in range(episodes):
        obs = env.reset()
        policy.reset()
        terminal = False
        while not terminal:
            obs, rewards, terminal = env.step(policy(obs))
            returns[episode] += rewards
    return returns


def summarize_returns(spec: ScenarioSpec, returns: np.ndarray) -> EvaluationResult:
    per_agent = returns.mean(axis=0)
    return EvaluationResult(
        per_agent=per_agent.tolist(),
        mean_return=float(per_agent[spec.agent_indices].mean()),
        episode_returns=returns.tolist(),
    )


def build_learner(config: RunConfig, spec: ScenarioSpec, rng: np.random.Generator) -> MultiAgentLearner:
    return MultiAgentLearner(config.algo_config(), observation_dims(spec), spec.teams, rng)


def checkpoint_metadata(config: RunConfig, spec: ScenarioSpec, learner: MultiAgentLearner, timestep: int) -> dict:
    # location-independent: the same run written to two directories gives identical bytes
    stored = to_plain({key: value for key, value in config.to_resolved().items() if key != "out"})
    return {
        "run": learner.metadata.model_dump(),
        "config": stored,
        "config_digest": compute_digest(stored),
        "scenario": config.scenario,
        "observation_layout": {role: [list(block) for block in blocks] for role, blocks in observation_layout(spec).items()},
        "observation_dims": observation_dims(spec),
        "timestep": timestep,
    }


def _write_diagnostic(out_dir: str, timestep: int, episode: int, error: Exception, learner: MultiAgentLearner) -> str:
    path = os.path.join(out_dir, DIAGNOSTIC_NAME)
    snapshot = {
        "error": str(error),
        "timestep": timestep,
        "episode": episode,
        "updates_done": learner.updates_done,
        "run": learner.metadata.model_dump(),
        "parameter_digest": params_digest(learner.state_arrays()),
        "non_finite_arrays": sorted(
            name for name, value in learner.state_arrays().items() if not np.all(np.isfinite(value))
        ),
    }
    with open(path, "w") as f:
        yaml.safe_dump(snapshot, f, sort_keys=True)
    return path


def train(config: RunConfig) -> RunArtifacts:
    """Run the interaction/training loop and write metrics, resolved config and checkpoint."""
    out_dir = config.out
    os.makedirs(out_dir, exist_ok=True)
    resolved_path = write_resolved(config, out_dir)
    attach_file_handler(os.path.join(out_dir, LOG_NAME))
    try:
        return _train(config, out_dir, resolved_path)
    finally:
        detach_file_handlers()


def _train(config: RunConfig, out_dir: str, resolved_path: str) -> RunArtifacts:
    streams = SeedStreams(config.seed)
    spec = build_spec(config.scenario_name, config.n_agents, max_episode_len=config.max_episode_len)
    learner = build_learner(config, spec, streams["init"])
    env = ParticleEnv(spec, streams["env"])
    explore_rng, sample_rng = streams["exploration"], streams["sampling"]
    windows = learner.cfg.uses_windows
    seq_length = config.seq_length if windows else 1
    replay: ReplayBuffer = ReplayBuffer(config.buffer_capacity)
    sequence = SequenceBuffer(seq_length)
    metrics_path = os.path.join(out_dir, METRICS_NAME)
    checkpoint_path = os.path.join(out_dir, CHECKPOINT_NAME)
    rows: List[MetricsRow] = []

    logger.info(
        f"Training {config.algo} on {config.scenario} for {config.time_steps} steps "
        f"(batch {config.batch_size}, seed {config.seed})"
    )
    started = time.perf_counter()
    obs = env.reset()
    state = env.state()
    episode = 0
    with MetricsWriter(metrics_path, spec.n_learners) as writer:
        for t in range(config.time_steps):
            if windows:
                inputs = [acting_window(sequence.transitions(), a, obs[a], seq_length) for a in range(len(obs))]
            else:
                inputs = obs
            actions = [explore(u, explore_rng, config.epsilon, config.noise_rate) for u in learner.act(inputs)]
            step_index = env.world.step_index
            next_obs, rewards, terminal = env.step(actions)
            next_state = env.state()
            transition = Transition(
                state=state,
                next_state=next_state,
                obs=obs,
                next_obs=next_obs,
                actions=actions,
                rewards=rewards,
                terminal=terminal,
                step_index=step_index,
                episode_index=env.world.episode_index,
            )
            if windows:
                sequence.push(transition)
                replay.push(sequence.snapshot())
            else:
                replay.push(transition)

            if replay.is_ready(config.batch_size):
                sampled = replay.sample(config.batch_size, sample_rng)
                batch = collate_windows(sampled, seq_length) if windows else collate_transitions(sampled)
                if learner.updates_done == 0:
                    logger.info(f"Replay holds {len(replay)} elements; updates start at timestep {t}")
                try:
                    losses = learner.update(batch, t)
                except TrainingDivergedError as e:
                    snapshot = _write_diagnostic(out_dir, t, episode, e, learner)
                    logger.error(f"Training diverged at timestep {t}: {e}; snapshot in {snapshot}")
                    raise TrainingDivergedError(str(e), snapshot_path=snapshot) from e
                logger.debug(f"t={t} critic loss {losses.critic:.6f} actor objective {losses.actor:.6f}")

            obs, state = next_obs, next_state
            if terminal:
                episode += 1
                obs = env.reset()
                state = env.state()
                sequence.reset()

            timestep = t + 1
            if timestep % config.eval_every == 0:
                result = evaluate_learner(learner, spec, config.eval_episodes, streams.fresh("eval"))
                row = MetricsRow(
                    timestep=timestep,
                    episode=episode,
                    agent_returns=result.per_agent,
                    mean_return=result.mean_return,
                    wall_clock_s=time.perf_counter() - started if config.wall_clock else 0.0,
                )
                writer.write(row)
                rows.append(row)
                logger.info(f"timestep {timestep}: mean return {row.mean_return:.4f} after {episode} episodes")

    checkpoint_save(
        checkpoint_path,
        learner.state_arrays(),
        checkpoint_metadata(config, spec, learner, config.time_steps),
    )
    return RunArtifacts(
        out_dir=out_dir,
        metrics_path=metrics_path,
        checkpoint_path=checkpoint_path,
        resolved_path=resolved_path,
        updates_done=learner.updates_done,
        rows=rows,
    )


def evaluate_learner(
    learner: MultiAgentLearner, spec: ScenarioSpec, episodes: int, rng: np.random.Generator
) -> EvaluationResult:
    return summarize_returns(spec, run_episodes(spec, LearnerPolicy(learner), episodes, rng))


def load_learner(checkpoint_path: str, scenario: str, max_episode_len: Optional[int] = None):
    """Rebuild the learner stored in a checkpoint against a scenario with the same observation layout."""
    arrays, metadata = checkpoint_load(checkpoint_path)
    name, n_agents = resolve_scenario_id(scenario)
    values = {**metadata["config"], "scenario": scenario}
    values.pop("Num-adversaries", None)
    try:
        config = RunConfig.model_validate(values)
    except ValidationError as e:
        raise CheckpointIncompatibleError(f"checkpoint cannot run on {scenario}: {e.errors()[0]['msg']}") from e
    spec = build_spec(name, n_agents, max_episode_len=max_episode_len or config.max_episode_len)
    stored_layout = metadata.get("observation_layout")
    layout = {role: [list(block) for block in blocks] for role, blocks in observation_layout(spec).items()}
    if stored_layout != layout or metadata.get("observation_dims") != observation_dims(spec):
        raise CheckpointIncompatibleError(
            f"checkpoint was trained on layout {stored_layout}, scenario {scenario} has {layout}"
        )
    learner = build_learner(config, spec, np.random.default_rng(0))
    learner.load_arrays(arrays)
    logger.debug(f"Loaded checkpoint {checkpoint_path} (config digest {metadata.get('config_digest')})")
    return learner, spec, config


def evaluate(checkpoint_path: str, scenario: str, episodes: int, seed: int) -> EvaluationResult:
    learner, spec, _ = load_learner(checkpoint_path, scenario)
    result = evaluate_learner(learner, spec, episodes, SeedStreams(seed).fresh("eval"))
    logger.info(f"Evaluated {checkpoint_path} on {scenario}: mean return {result.mean_return:.4f}")
    return result


def policy_returns(spec: ScenarioSpec, policy, episodes: int, seed: int) -> EvaluationResult:
    """Oracle rollout of a fixed policy on the same evaluation stream evaluate() uses."""
    return summarize_returns(spec, run_episodes(spec, policy, episodes, SeedStreams(seed).fresh("eval")))
