"""
Verification suites.

Each suite returns a ``VerifyReport`` listing its criteria with the measured
value and the threshold it was held against. ``all`` runs every suite except
``learning``, which trains two desk-scale runs.
"""

import os
import tempfile
import time
from collections import deque
from typing import Callable, Dict, List, Optional

import numpy as np

from marl_avoidance.algos.ddpg import actor_loss, critic_loss, critic_target, td_target
from marl_avoidance.algos.facmac import (
    CriticPlan,
    actor_params,
    facmac_actor_loss,
    facmac_target,
    facmac_td_loss,
    td_params,
)
from marl_avoidance.algos.learner import MultiAgentLearner
from marl_avoidance.algos.nets import ACTION_DIM, CriticLayout, critic_input_dim
from marl_avoidance.buffers import ReplayBuffer, SequenceBuffer, explore
from marl_avoidance.env import ParticleEnv
from marl_avoidance.errors import ConfigurationError
from marl_avoidance.harness.checkpoint import CHECKPOINT_NAME
from marl_avoidance.harness.oracles import oracle_reward, random_batch, random_world, stationary_on_targets_return
from marl_avoidance.harness.plotting import emit_plot
from marl_avoidance.harness.runner import METRICS_NAME, RandomPolicy, policy_returns, train
from marl_avoidance.harness.seeding import SeedStreams
from marl_avoidance.logging import logger
from marl_avoidance.models.algo import AlgoConfig
from marl_avoidance.models.run import CriterionResult, RunConfig, VerifyReport
from marl_avoidance.models.transitions import Transition
from marl_avoidance.nn.gradcheck import grad_check_detailed
from marl_avoidance.nn.lstm import LSTMActorSpec, init_lstm_actor, lstm_actor_backward, lstm_actor_forward
from marl_avoidance.nn.mixers import init_mixer, mixer_backward, mixer_forward, mixer_vdn
from marl_avoidance.nn.mlp import MLPSpec, init_mlp, mlp_backward, mlp_forward
from marl_avoidance.scenarios import build_spec, observation_dims, resolve_scenario_id, reward

SUITES = (
    "grad-check",
    "td-target",
    "mixers",
    "collapse",
    "buffers",
    "reward-oracle",
    "determinism",
    "staged",
    "scaling",
    "learning",
)

GRAD_TOLERANCE = 1e-4
GRAD_STEP = 1e-5
SAMPLES_PER_LOSS = 64
REWARD_SCENARIOS = ("spread-3a", "tunnel", "simple-tunnel", "obstacle-predator-prey")


def at_most(name: str, measured: float, threshold: float) -> CriterionResult:
    return CriterionResult(name=name, passed=bool(measured <= threshold), measured=float(measured), threshold=threshold)


def above(name: str, measured: float, threshold: float) -> CriterionResult:
    return CriterionResult(name=name, passed=bool(measured > threshold), measured=float(measured), threshold=threshold)


def _max_abs_change(before: Dict[str, np.ndarray], after: Dict[str, np.ndarray]) -> float:
    if not before:
        return 0.0
    return max(float(np.max(np.abs(after[k] - before[k]), initial=0.0)) for k in before)


def _snapshot(params: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
    return {k: v.copy() for k, v in params.items()}


def _tiny_learner(
    algorithm: str, obs_dims: List[int], rng: np.random.Generator, **overrides
) -> MultiAgentLearner:
    cfg = AlgoConfig(algorithm=algorithm, hidden=16, lstm_hidden=8, mixer_embed=8, **overrides)
    return MultiAgentLearner(cfg, obs_dims, [list(range(len(obs_dims)))], rng)


# --- gradient fidelity ------------------------------------------------------


def _check(name: str, fn: Callable, params, rng: np.random.Generator, perturb: float) -> CriterionResult:
    result = grad_check_detailed(
        fn, params, SAMPLES_PER_LOSS, h=GRAD_STEP, rng=rng, perturb=perturb, tolerance=GRAD_TOLERANCE
    )
    criterion = at_most(name, result.worst, GRAD_TOLERANCE)
    return criterion.model_copy(update={"detail": result.describe(GRAD_STEP)})


def _projection_loss(forward, backward, projection: np.ndarray):
    def fn(params):
        out, cache = forward(params)
        return float(np.sum(out * projection)), backward(cache, projection)

    return fn


def _per_agent_losses(algorithm: str, layout: CriticLayout, rng, perturb: float, **overrides) -> List[CriterionResult]:
    dims = [5, 4, 6]
    learner = _tiny_learner(algorithm, dims, rng, **overrides)
    seq_length = learner.cfg.seq_length if learner.cfg.uses_windows else None
    batch = random_batch(rng, dims, 16, seq_length=seq_length)
    nets = learner.nets
    y = critic_target(1, batch, nets, learner.cfg.gamma, layout)
    return [
        _check(
            f"{algorithm}-critic-loss",
            lambda p: critic_loss(1, batch, nets, y, layout),
            nets[1].critic,
            rng,
            perturb,
        ),
        _check(f"{algorithm}-actor-loss", lambda p: actor_loss(1, batch, nets, layout), nets[1].actor, rng, perturb),
    ]


def _facmac_losses(mixer_kind: str, sharing: str, rng, perturb: float) -> List[CriterionResult]:
    dims = [5, 5, 5]
    learner = _tiny_learner("facmac", dims, rng, mixer=mixer_kind, critic_sharing=sharing)
    batch = random_batch(rng, dims, 16, shared_reward=True)
    plan = CriticPlan(mode=sharing)
    mixer, nets = learner.mixers[0], learner.nets
    owner = plan.owners(mixer.team)[-1]
    y = facmac_target(plan, owner, mixer, batch, nets, learner.cfg.gamma)
    tag = f"facmac-{mixer_kind}-{sharing}"
    return [
        _check(
            f"{tag}-td-loss",
            lambda p: facmac_td_loss(plan, owner, mixer, batch, nets, y),
            td_params(plan, owner, mixer, nets),
            rng,
            perturb,
        ),
        _check(
            f"{tag}-actor-loss",
            lambda p: facmac_actor_loss(plan, owner, mixer, batch, nets),
            actor_params(plan, owner, mixer, nets),
            rng,
            perturb,
        ),
    ]


def _mixer_gradient(kind: str, rng, perturb: float) -> CriterionResult:
    state = rng.normal(size=(12, 7))
    params = {} if kind == "vdn" else init_mixer(7, 3, 6, rng)
    params["qs"] = rng.normal(size=(12, 3))
    projection = rng.normal(size=12)

    def fn(p):
        hyper = {k: v for k, v in p.items() if k != "qs"}
        q_tot, cache = mixer_forward(kind, state, p["qs"], hyper)
        dqs, grads = mixer_backward(cache, projection)
        return float(np.sum(q_tot * projection)), {**grads, "qs": dqs}

    return _check(f"{kind}-mixer", fn, params, rng, perturb)


def grad_check_suite(perturb: float = 0.0, seed: int = 0) -> List[CriterionResult]:
    rng = np.random.default_rng(seed)
    results: List[CriterionResult] = []

    mlp_spec = MLPSpec(widths=(6, 16, 16, 2), output_activation="tanh")
    mlp_params = init_mlp(mlp_spec, rng)
    x = rng.normal(size=(10, 6))
    results.append(
        _check(
            "mlp",
            _projection_loss(
                lambda p: mlp_forward(mlp_spec, p, x),
                lambda cache, d: mlp_backward(cache, d)[1],
                rng.normal(size=(10, 2)),
            ),
            mlp_params,
            rng,
            perturb,
        )
    )

    lstm_spec = LSTMActorSpec(input_dim=4, hidden=8, dense=8, output_dim=2)
    lstm_params = init_lstm_actor(lstm_spec, rng)
    window = rng.normal(size=(6, 5, 4))
    results.append(
        _check(
            "lstm-actor-unroll",
            _projection_loss(
                lambda p: lstm_actor_forward(lstm_spec, p, window),
                lambda cache, d: lstm_actor_backward(cache, d)[1],
                rng.normal(size=(6, 2)),
            ),
            lstm_params,
            rng,
            perturb,
        )
    )

    for kind in ("vdn", "monotonic", "nonmonotonic"):
        results.append(_mixer_gradient(kind, rng, perturb))

    results += _per_agent_losses("maddpg", CriticLayout.JOINT, rng, perturb)
    results += _per_agent_losses("maddpg-l", CriticLayout.STATE_OWN, rng, perturb)
    results += _per_agent_losses("iddpg", CriticLayout.LOCAL, rng, perturb)
    results += _per_agent_losses("maddpg-lstm", CriticLayout.JOINT, rng, perturb, seq_length=5)
    for kind in ("vdn", "monotonic", "nonmonotonic"):
        for sharing in ("own-critics", "simulate-with-own"):
            results += _facmac_losses(kind, sharing, rng, perturb)
    return results


# --- arithmetic and mixer laws ----------------------------------------------


def td_target_suite() -> List[CriterionResult]:
    rng = np.random.default_rng(0)
    y = float(td_target(1.0, 2.0, 0.95, False))
    y_terminal = float(td_target(1.0, 2.0, 0.95, True))

    learner = _tiny_learner("maddpg", [3], rng)
    batch = random_batch(rng, [3], 1)
    nets = learner.nets
    target = critic_target(0, batch, nets, 0.95, CriticLayout.JOINT)
    loss, _ = critic_loss(0, batch, nets, target, CriticLayout.JOINT)
    x = np.concatenate([batch.state, batch.actions[0]], axis=1)
    q = float(nets[0].q_value(x)[0][0])
    by_hand = (float(target[0]) - q) ** 2
    return [
        at_most("nonterminal-target", abs(y - 2.9), 1e-12),
        at_most("terminal-target", abs(y_terminal - 1.0), 0.0),
        at_most("single-sample-critic-loss", abs(loss - by_hand), 1e-12),
    ]


def _monotonic_min_increment(rng: np.random.Generator, draws: int = 10, per_draw: int = 100) -> float:
    smallest = np.inf
    n = 4
    for _ in range(draws):
        params = init_mixer(6, n, 8, rng)
        scale = rng.uniform(0.5, 3.0)
        params = {k: v * scale for k, v in params.items()}
        state = rng.normal(size=(per_draw, 6))
        qs = rng.normal(scale=3.0, size=(per_draw, n))
        base, _ = mixer_forward("monotonic", state, qs, params)
        for a in range(n):
            bumped = qs.copy()
            bumped[:, a] += 1.0
            raised, _ = mixer_forward("monotonic", state, bumped, params)
            smallest = min(smallest, float(np.min(raised - base)))
    return smallest


def _nonmonotonic_increment() -> float:
    params = {k: np.zeros_like(v) for k, v in init_mixer(2, 2, 4, np.random.default_rng(0)).items()}
    params["hyper_w1.b"][:] = -1.0
    params["hyper_w2.b"][:] = 1.0
    state = np.zeros((1, 2))
    base, _ = mixer_forward("nonmonotonic", state, np.zeros((1, 2)), params)
    raised, _ = mixer_forward("nonmonotonic", state, np.array([[1.0, 0.0]]), params)
    return float(raised[0] - base[0])


def mixers_suite() -> List[CriterionResult]:
    rng = np.random.default_rng(1)
    qs = rng.normal(size=(1000, 5))
    looped = np.array([sum(float(v) for v in row) for row in qs])
    return [
        at_most("vdn-equals-sum", float(np.max(np.abs(mixer_vdn(qs) - looped))), 1e-12),
        at_most("monotonic-partials-nonnegative", -_monotonic_min_increment(rng), 1e-9),
        above("nonmonotonic-admits-negative-partial", -_nonmonotonic_increment(), 0.0),
    ]


# --- n = 1 collapse -----------------------------------------------------------


def collapse_suite(updates: int = 100) -> List[CriterionResult]:
    """With one agent and s identical to its observation, every critic layout is the same network."""
    dims = [4]
    learners = {}
    for algorithm in ("maddpg", "maddpg-l", "iddpg", "facmac"):
        overrides = {"mixer": "vdn"} if algorithm == "facmac" else {}
        learners[algorithm] = _tiny_learner(algorithm, dims, np.random.default_rng(7), **overrides)
    batch_rng = np.random.default_rng(8)
    batches = [random_batch(batch_rng, dims, 8) for _ in range(updates)]

    worst = {name: 0.0 for name in learners if name != "maddpg"}
    for t, batch in enumerate(batches):
        for learner in learners.values():
            learner.update(batch, t)
        reference = learners["maddpg"].state_arrays()
        for name in worst:
            worst[name] = max(worst[name], _max_abs_change(reference, learners[name].state_arrays()))
    return [at_most(f"maddpg-vs-{name}", value, 1e-10) for name, value in worst.items()]


# --- buffers ------------------------------------------------------------------


def _transition_pool(count: int) -> List[Transition]:
    zeros = np.zeros(2)
    return [
        Transition(
            state=zeros,
            next_state=zeros,
            obs=[zeros],
            next_obs=[zeros],
            actions=[zeros],
            rewards=[0.0],
            terminal=False,
            step_index=k,
            episode_index=0,
        )
        for k in range(count)
    ]


def _ring_mismatches(rng: np.random.Generator, programs: int) -> int:
    mismatches = 0
    for _ in range(programs):
        capacity = int(rng.integers(1, 8))
        ring: ReplayBuffer = ReplayBuffer(capacity)
        oracle: deque = deque(maxlen=capacity)
        for value in range(int(rng.integers(1, 30))):
            ring.push(value)
            oracle.append(value)
            if ring.items() != list(oracle) or len(ring) > capacity:
                mismatches += 1
    return mismatches


def _sequence_mismatches(rng: np.random.Generator, programs: int) -> int:
    pool = _transition_pool(16)
    mismatches = 0
    for _ in range(programs):
        seq_length = int(rng.integers(1, 6))
        buffer = SequenceBuffer(seq_length)
        oracle: deque = deque(maxlen=seq_length)
        for _ in range(int(rng.integers(1, 20))):
            if rng.random() < 0.2:
                buffer.reset()
                oracle.clear()
            else:
                item = pool[int(rng.integers(len(pool)))]
                buffer.push(item)
                oracle.append(item)
            if buffer.transitions() != list(oracle):
                mismatches += 1
    return mismatches


def _window_violations(seq_length: int = 5, steps: int = 60) -> int:
    """Windows snapshotted during a short rollout must stay inside one episode and be contiguous."""
    spec = build_spec("spread", 3, max_episode_len=7)
    rng = np.random.default_rng(3)
    env = ParticleEnv(spec, rng)
    obs = env.reset()
    state = env.state()
    buffer = SequenceBuffer(seq_length)
    violations = 0
    for _ in range(steps):
        actions = [rng.uniform(-1.0, 1.0, size=2) for _ in obs]
        step_index, episode_index = env.world.step_index, env.world.episode_index
        next_obs, rewards, terminal = env.step(actions)
        buffer.push(
            Transition(
                state=state,
                next_state=env.state(),
                obs=obs,
                next_obs=next_obs,
                actions=actions,
                rewards=rewards,
                terminal=terminal,
                step_index=step_index,
                episode_index=episode_index,
            )
        )
        window = buffer.snapshot().transitions
        if len({t.episode_index for t in window}) != 1:
            violations += 1
        if [t.step_index for t in window] != list(range(window[0].step_index, window[0].step_index + len(window))):
            violations += 1
        if len(window) != min(step_index + 1, seq_length):
            violations += 1
        obs, state = next_obs, env.state()
        if terminal:
            obs = env.reset()
            state = env.state()
            buffer.reset()
    return violations


def _uniformity_sigmas(rng: np.random.Generator, draws: int = 100_000, elements: int = 10) -> float:
    """Largest deviation of any element's draw count from uniform, in binomial standard deviations."""
    ring: ReplayBuffer = ReplayBuffer(elements)
    for value in range(elements):
        ring.push(value)
    per_call = elements // 2
    counts = np.zeros(elements)
    for _ in range(draws // per_call):
        for value in ring.sample(per_call, rng):
            counts[value] += 1
    p = 1.0 / elements
    sigma = np.sqrt(draws * p * (1.0 - p))
    return float(np.max(np.abs(counts - draws * p)) / sigma)


def buffers_suite(programs: int = 10_000) -> List[CriterionResult]:
    rng = np.random.default_rng(2)
    capacity = 97
    ring: ReplayBuffer = ReplayBuffer(capacity)
    largest = 0
    for value in range(100_000):
        largest = max(largest, len(ring.push(value)))

    eviction = SequenceBuffer(4)
    pool = _transition_pool(7)
    for item in pool:
        eviction.push(item)

    explore_rng_a, explore_rng_b = np.random.default_rng(5), np.random.default_rng(5)
    outputs_a = np.array([explore(np.full(2, 0.7), explore_rng_a, 1.0, 0.1) for _ in range(2000)])
    outputs_b = np.array([explore(np.full(2, -0.3), explore_rng_b, 1.0, 0.1) for _ in range(2000)])
    return [
        at_most("ring-matches-queue", _ring_mismatches(rng, programs), 0),
        at_most("ring-count-bounded", largest - capacity, 0),
        at_most("sequence-buffer-matches-deque", _sequence_mismatches(rng, programs), 0),
        at_most("sequence-eviction-exact", 0 if eviction.transitions() == pool[3:] else 1, 0),
        at_most("windows-within-episodes", _window_violations(), 0),
        at_most("sampling-uniformity-sigmas", _uniformity_sigmas(rng), 3.0),
        at_most("epsilon-one-ignores-input", float(np.max(np.abs(outputs_a - outputs_b))), 0.0),
        at_most("epsilon-one-in-range", float(np.max(np.abs(outputs_a))) - 1.0, 0.0),
    ]


# --- rewards ------------------------------------------------------------------


def reward_oracle_suite(worlds: int = 1000) -> List[CriterionResult]:
    results = []
    rng = np.random.default_rng(4)
    for scenario in REWARD_SCENARIOS:
        spec = build_spec(*resolve_scenario_id(scenario))
        worst = 0.0
        for _ in range(worlds):
            world = random_world(spec, rng)
            fast = reward(world, None, world, spec)
            slow = np.array(oracle_reward(world, spec))
            worst = max(worst, float(np.max(np.abs(fast - slow))))
        results.append(at_most(f"{scenario}-reward", worst, 1e-12))
    return results


# --- runs ---------------------------------------------------------------------


def _tiny_run(out_dir: str, **overrides) -> RunConfig:
    values = {
        "scenario": "spread-3a",
        "algo": "maddpg",
        "time-steps": 300,
        "max-episode-len": 25,
        "Batch-size": 32,
        "buffer-capacity": 1000,
        "eval-every": 100,
        "eval-episodes": 1,
        "hidden-size": 16,
        "seed": 3,
        "out": out_dir,
    }
    values.update(overrides)
    return RunConfig.model_validate(values)


def _read_bytes(path: str) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def determinism_suite(workdir: str) -> List[CriterionResult]:
    outputs = []
    for name in ("first", "second"):
        out_dir = os.path.join(workdir, name)
        train(_tiny_run(out_dir))
        svg = emit_plot([os.path.join(out_dir, METRICS_NAME)], os.path.join(out_dir, "curves.svg"), labels=["run"])
        outputs.append(
            {
                "metrics": _read_bytes(os.path.join(out_dir, METRICS_NAME)),
                "checkpoint": _read_bytes(os.path.join(out_dir, CHECKPOINT_NAME)),
                "svg": _read_bytes(svg),
            }
        )
    return [
        at_most(f"identical-{artifact}", 0 if outputs[0][artifact] == outputs[1][artifact] else 1, 0)
        for artifact in ("metrics", "checkpoint", "svg")
    ]


def staged_suite(perturb: float = 0.0, watershed: int = 3) -> List[CriterionResult]:
    rng = np.random.default_rng(6)
    dims = [5, 5, 5]
    learner = _tiny_learner("facmac", dims, rng, mixer="nonmonotonic", staged_watershed=watershed)
    mixer = learner.mixers[0]
    frozen, frozen_target, moved = 0.0, 0.0, 0.0
    for t in range(watershed + 2):
        batch = random_batch(rng, dims, 8, shared_reward=True)
        params_before, target_before = _snapshot(mixer.params), _snapshot(mixer.target)
        learner.update(batch, t)
        if t < watershed:
            frozen = max(frozen, _max_abs_change(params_before, mixer.params))
            frozen_target = max(frozen_target, _max_abs_change(target_before, mixer.target))
        elif t == watershed:
            moved = _max_abs_change(params_before, mixer.params)

    batch = random_batch(rng, dims, 8, shared_reward=True)
    nets = learner.nets
    stage_one = _check(
        "stage-one-actor-gradient",
        lambda p: actor_loss(0, batch, nets, CriticLayout.LOCAL),
        nets[0].actor,
        rng,
        perturb,
    )
    return [
        at_most("mixer-frozen-before-watershed", frozen, 0.0),
        at_most("mixer-target-frozen-before-watershed", frozen_target, 0.0),
        above("mixer-moves-at-watershed", moved, 0.0),
        stage_one,
    ]


def _seconds_per_update(learner: MultiAgentLearner, batch, repeats: int) -> float:
    learner.update(batch, 0)
    started = time.perf_counter()
    for t in range(repeats):
        learner.update(batch, t + 1)
    return (time.perf_counter() - started) / repeats


def scaling_suite(repeats: int = 10) -> List[CriterionResult]:
    results = []
    for n in (3, 6, 9):
        dims = observation_dims(build_spec("spread", n))
        d_obs = sum(dims)
        joint = critic_input_dim(CriticLayout.JOINT, dims, 0)
        light = critic_input_dim(CriticLayout.STATE_OWN, dims, 0)
        results.append(at_most(f"maddpg-critic-width-n{n}", abs(joint - (d_obs + n * ACTION_DIM)), 0))
        results.append(at_most(f"maddpg-l-critic-width-n{n}", abs(light - (d_obs + ACTION_DIM)), 0))

    dims = observation_dims(build_spec("spread", 9))
    rng = np.random.default_rng(9)
    batch = random_batch(rng, dims, 32)
    timings = {}
    for algorithm in ("maddpg", "maddpg-l"):
        cfg = AlgoConfig(algorithm=algorithm)
        learner = MultiAgentLearner(cfg, dims, [list(range(9))], np.random.default_rng(10))
        timings[algorithm] = _seconds_per_update(learner, batch, repeats)
    logger.info(f"Seconds per update at n=9: {timings}")
    results.append(at_most("maddpg-l-over-maddpg-update-time-n9", timings["maddpg-l"] / timings["maddpg"], 1.0))
    return results


def learning_suite(workdir: str, time_steps: int = 100_000, seed: int = 0) -> List[CriterionResult]:
    """Desk-scale Spread-3a runs must close 30% of the random-to-stationary-optimum gap."""
    spec = build_spec("spread", 3)
    episodes = 10
    random_mean = policy_returns(spec, RandomPolicy(np.random.default_rng(seed)), episodes, seed).mean_return
    bound = stationary_on_targets_return(spec, episodes, SeedStreams(seed).fresh("eval"))
    logger.info(f"Learning baselines: random {random_mean:.3f}, stationary-on-target {bound:.3f}")
    results = []
    for algorithm in ("maddpg", "maddpg-l"):
        config = RunConfig.model_validate(
            {
                "scenario": "spread-3a",
                "algo": algorithm,
                "scale": "desk",
                "time-steps": time_steps,
                "Batch-size": 128,
                "eval-every": max(time_steps // 20, 1),
                "eval-episodes": episodes,
                "seed": seed,
                "out": os.path.join(workdir, algorithm),
            }
        )
        artifacts = train(config)
        final = [row.mean_return for row in artifacts.rows[-5:]]
        learned = float(np.mean(final)) if final else random_mean
        gap_closed = (learned - random_mean) / (bound - random_mean)
        results.append(at_most(f"{algorithm}-gap-shortfall", 0.3 - gap_closed, 0.0))
    return results


def run_suite(suite: str, perturb: float = 0.0, workdir: Optional[str] = None) -> VerifyReport:
    if suite not in SUITES:
        raise ConfigurationError(f"unknown suite '{suite}', expected one of {list(SUITES) + ['all']}", key="suite")
    logger.info(f"Running verification suite {suite}")
    with tempfile.TemporaryDirectory(prefix=f"verify-{suite}-") as scratch:
        root = workdir or scratch
        if suite == "grad-check":
            criteria = grad_check_suite(perturb)
        elif suite == "td-target":
            criteria = td_target_suite()
        elif suite == "mixers":
            criteria = mixers_suite()
        elif suite == "collapse":
            criteria = collapse_suite()
        elif suite == "buffers":
            criteria = buffers_suite()
        elif suite == "reward-oracle":
            criteria = reward_oracle_suite()
        elif suite == "determinism":
            criteria = determinism_suite(root)
        elif suite == "staged":
            criteria = staged_suite(perturb)
        elif suite == "scaling":
            criteria = scaling_suite()
        else:
            criteria = learning_suite(root)
    for c in criteria:
        status = "pass" if c.passed else "FAIL"
        log = logger.info if c.passed else logger.warning
        log(f"{suite}/{c.name}: {status} (measured {c.measured:.3e}, threshold {c.threshold:.3e})")
    return VerifyReport(suite=suite, passed=all(c.passed for c in criteria), criteria=criteria)


def run_suites(suite: str, perturb: float = 0.0, workdir: Optional[str] = None) -> List[VerifyReport]:
    names = [s for s in SUITES if s != "learning"] if suite == "all" else [suite]
    return [run_suite(name, perturb=perturb, workdir=workdir) for name in names]
