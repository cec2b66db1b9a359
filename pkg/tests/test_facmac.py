import numpy as np
import pytest

from marl_avoidance.algos.facmac import (
    CriticPlan,
    _team_values,
    actor_params,
    check_shared_reward,
    facmac_actor_loss,
    facmac_target,
    facmac_td_loss,
    in_first_stage,
    td_params,
)
from marl_avoidance.errors import ConfigurationError, UnsupportedScenarioError
from marl_avoidance.nn.gradcheck import grad_check
from marl_avoidance.nn.mixers import mixer_forward
from marl_avoidance.nn.optim import copy_params

from .helpers import synthetic_batch, tiny_config, tiny_learner

OBS_DIMS = [4, 4, 4]
SHARING = ["own-critics", "simulate-with-own"]


class TestCriticPlan:
    def test_own_critics(self):
        plan = CriticPlan(mode="own-critics")
        assert plan.owners([0, 1, 2]) == [None]
        assert plan.scorer(None, 2) == 2
        assert plan.trained(None, [0, 1, 2]) == [0, 1, 2]

    def test_simulate_with_own(self):
        plan = CriticPlan(mode="simulate-with-own")
        assert plan.owners([0, 1, 2]) == [0, 1, 2]
        assert plan.scorer(1, 2) == 1
        assert plan.trained(1, [0, 1, 2]) == [1]

    def test_sharing_modes_agree_on_identical_critics(self):
        """Own critics and simulate-with-own score the same Q_tot when all critics are equal."""
        learner = tiny_learner("facmac", OBS_DIMS, seed=3)
        batch = synthetic_batch(OBS_DIMS, seed=4, shared_reward=True)
        mixer = learner.mixers[0]

        def q_tot(mode, owner):
            qs, _ = _team_values(CriticPlan(mode=mode), owner, mixer.team, learner.nets, batch.obs, batch.actions)
            return mixer_forward(mixer.kind, batch.state, qs, mixer.params)[0]

        own, simulated = q_tot("own-critics", None), q_tot("simulate-with-own", 0)
        assert not np.allclose(own, simulated)

        for net in learner.nets[1:]:
            net.critic = copy_params(learner.nets[0].critic)
        np.testing.assert_array_equal(q_tot("own-critics", None), q_tot("simulate-with-own", 0))


class TestSharedReward:
    def test_distinct_rewards_rejected(self):
        """Test that factored critics refuse per-agent rewards."""
        learner = tiny_learner("facmac", OBS_DIMS, mixer="vdn")
        with pytest.raises(UnsupportedScenarioError, match="shared reward"):
            learner.update(synthetic_batch(OBS_DIMS, shared_reward=False), 0)

    def test_shared_column(self):
        batch = synthetic_batch(OBS_DIMS, shared_reward=True)
        np.testing.assert_array_equal(check_shared_reward(batch, [0, 1, 2]), batch.rewards[:, 0])


@pytest.mark.parametrize("mixer", ["vdn", "monotonic", "nonmonotonic"])
@pytest.mark.parametrize("sharing", SHARING)
class TestFactoredGradients:
    def test_td_loss(self, mixer, sharing):
        learner = tiny_learner("facmac", OBS_DIMS, seed=4, mixer=mixer, critic_sharing=sharing)
        batch = synthetic_batch(OBS_DIMS, seed=5, shared_reward=True)
        plan = CriticPlan(mode=sharing)
        team_mixer = learner.mixers[0]
        owner = plan.owners(team_mixer.team)[-1]
        y = facmac_target(plan, owner, team_mixer, batch, learner.nets, 0.95)

        def fn(_):
            return facmac_td_loss(plan, owner, team_mixer, batch, learner.nets, y)

        params = td_params(plan, owner, team_mixer, learner.nets)
        assert grad_check(fn, params, sample_count=48, rng=np.random.default_rng(6)) < 1e-4

    def test_actor_loss(self, mixer, sharing):
        learner = tiny_learner("facmac", OBS_DIMS, seed=4, mixer=mixer, critic_sharing=sharing)
        batch = synthetic_batch(OBS_DIMS, seed=5, shared_reward=True)
        plan = CriticPlan(mode=sharing)
        team_mixer = learner.mixers[0]
        owner = plan.owners(team_mixer.team)[-1]

        def fn(_):
            loss, grads = facmac_actor_loss(plan, owner, team_mixer, batch, learner.nets)
            trained = {f"agent{k}.actor." for k in plan.trained(owner, team_mixer.team)}
            return loss, {name: g for name, g in grads.items() if any(name.startswith(p) for p in trained)}

        params = actor_params(plan, owner, team_mixer, learner.nets)
        assert grad_check(fn, params, sample_count=48, rng=np.random.default_rng(6)) < 1e-4


class TestFacmacUpdate:
    @pytest.mark.parametrize("sharing", SHARING)
    def test_every_critic_trains(self, sharing):
        """Test that one update moves all team critics under either sharing mode."""
        learner = tiny_learner("facmac", OBS_DIMS, mixer="monotonic", critic_sharing=sharing)
        before = [copy_params(net.critic) for net in learner.nets]
        losses = learner.update(synthetic_batch(OBS_DIMS, shared_reward=True), 0)

        assert np.isfinite(losses.critic)
        for net, old in zip(learner.nets, before):
            assert not np.array_equal(net.critic["W0"], old["W0"])

    def test_simulate_needs_identical_critics(self):
        learner = tiny_learner("facmac", [4, 5, 4], mixer="vdn", critic_sharing="simulate-with-own")
        with pytest.raises(ConfigurationError, match="identical critic"):
            learner.update(synthetic_batch([4, 5, 4], shared_reward=True), 0)

    def test_one_mixer_per_team(self):
        learner = tiny_learner("facmac", [4, 4, 4, 3], mixer="nonmonotonic", teams=[[0, 1, 2], [3]])
        assert [mixer.team for mixer in learner.mixers] == [[0, 1, 2], [3]]
        assert learner.mixers[0].params["hyper_w1.W"].shape == (15, 12)

    def test_vdn_has_no_parameters(self):
        learner = tiny_learner("facmac", OBS_DIMS, mixer="vdn")
        assert learner.mixers[0].params == {}
        assert not any(name.startswith("mixer") for name in learner.state_arrays())


class TestStagedTraining:
    def test_in_first_stage(self):
        cfg = tiny_config("facmac", staged_watershed=3)
        assert [in_first_stage(cfg, t) for t in range(5)] == [True, True, True, False, False]
        assert not in_first_stage(tiny_config("facmac"), 0)

    def test_mixer_frozen_until_watershed(self):
        """Test that the mixer and its target only move from the watershed on."""
        learner = tiny_learner("facmac", OBS_DIMS, mixer="nonmonotonic", staged_watershed=2, tau=0.5)
        batch = synthetic_batch(OBS_DIMS, shared_reward=True)
        mixer = learner.mixers[0]
        params, target = copy_params(mixer.params), copy_params(mixer.target)

        for t in range(2):
            learner.update(batch, t)
            for name in params:
                np.testing.assert_array_equal(mixer.params[name], params[name])
                np.testing.assert_array_equal(mixer.target[name], target[name])

        learner.update(batch, 2)
        assert not np.array_equal(mixer.params["hyper_w1.W"], params["hyper_w1.W"])
        assert not np.array_equal(mixer.target["hyper_w1.W"], target["hyper_w1.W"])

    def test_first_stage_accepts_distinct_rewards(self):
        """Before the watershed agents train on their own rewards."""
        learner = tiny_learner("facmac", OBS_DIMS, mixer="vdn", staged_watershed=10)
        losses = learner.update(synthetic_batch(OBS_DIMS, shared_reward=False), 0)
        assert np.isfinite(losses.actor)
