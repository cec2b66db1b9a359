import copy

import numpy as np
import pytest
from pydantic import ValidationError

from marl_avoidance.algos.ddpg import actor_loss, critic_loss, critic_target, maddpg_l_update, maddpg_update, td_target
from marl_avoidance.algos.nets import LAYOUTS, CriticLayout, critic_input_dim, critic_inputs
from marl_avoidance.errors import CheckpointIncompatibleError, InputError
from marl_avoidance.models.algo import DEFAULT_MIXER, AlgoConfig
from marl_avoidance.models.run import RunConfig
from marl_avoidance.nn.gradcheck import grad_check
from marl_avoidance.nn.optim import copy_params

from .helpers import synthetic_batch, tiny_learner

OBS_DIMS = [5, 5, 5]


class TestCriticWidths:
    @pytest.mark.parametrize(
        "algorithm, width",
        [("maddpg", 48), ("maddpg-lstm", 48), ("maddpg-l", 44), ("iddpg", 16), ("facmac", 16)],
    )
    def test_spread_three_agents(self, algorithm, width):
        """Critic input widths for three 14-wide observations."""
        assert critic_input_dim(LAYOUTS[algorithm], [14, 14, 14], 0) == width

    def test_lightweight_critic_grows_linearly(self):
        joint = [critic_input_dim(CriticLayout.JOINT, [10] * n, 0) for n in (3, 6, 9)]
        light = [critic_input_dim(CriticLayout.STATE_OWN, [10] * n, 0) for n in (3, 6, 9)]

        assert light == [32, 62, 92]
        assert all(a > b for a, b in zip(joint, light))


class TestTDTarget:
    def test_values(self):
        np.testing.assert_allclose(td_target([1.0], [2.0], 0.95, [0.0]), [2.9], atol=1e-12)

    def test_terminal_masks_bootstrap(self):
        np.testing.assert_array_equal(td_target([1.0, -0.5], [7.0, 3.0], 0.95, [1.0, 1.0]), [1.0, -0.5])


class TestLossGradients:
    @pytest.mark.parametrize("algorithm", ["maddpg", "maddpg-l", "iddpg"])
    def test_critic_loss(self, algorithm):
        learner = tiny_learner(algorithm, OBS_DIMS, seed=1)
        batch = synthetic_batch(OBS_DIMS, seed=2)
        layout = LAYOUTS[algorithm]
        y = critic_target(1, batch, learner.nets, 0.95, layout)

        def fn(_):
            return critic_loss(1, batch, learner.nets, y, layout)

        assert grad_check(fn, learner.nets[1].critic, sample_count=48, rng=np.random.default_rng(3)) < 1e-4

    @pytest.mark.parametrize("algorithm", ["maddpg", "maddpg-l", "iddpg"])
    def test_actor_loss(self, algorithm):
        learner = tiny_learner(algorithm, OBS_DIMS, seed=1)
        batch = synthetic_batch(OBS_DIMS, seed=2)
        layout = LAYOUTS[algorithm]

        def fn(_):
            return actor_loss(2, batch, learner.nets, layout)

        assert grad_check(fn, learner.nets[2].actor, sample_count=48, rng=np.random.default_rng(3)) < 1e-4

    def test_lstm_actor_loss(self):
        learner = tiny_learner("maddpg-lstm", OBS_DIMS, seed=1, seq_length=4)
        batch = synthetic_batch(OBS_DIMS, seed=2, seq_length=4)

        def fn(_):
            return actor_loss(0, batch, learner.nets, CriticLayout.JOINT)

        assert grad_check(fn, learner.nets[0].actor, sample_count=48, rng=np.random.default_rng(3)) < 1e-4


class TestUpdates:
    def test_update_touches_only_own_networks(self):
        """Test that one agent's update leaves every other agent's parameters untouched."""
        learner = tiny_learner("maddpg-l", OBS_DIMS)
        before = [copy_params(net.critic) for net in learner.nets]
        maddpg_l_update(0, synthetic_batch(OBS_DIMS), learner.nets, learner.cfg)

        assert not np.array_equal(learner.nets[0].critic["W0"], before[0]["W0"])
        for a in (1, 2):
            for name, value in learner.nets[a].critic.items():
                np.testing.assert_array_equal(value, before[a][name])

    def test_lstm_update_needs_windows(self):
        learner = tiny_learner("maddpg-lstm", OBS_DIMS)
        with pytest.raises(InputError, match="windowed"):
            learner.update(synthetic_batch(OBS_DIMS), 0)

    @pytest.mark.parametrize("algorithm", ["iddpg", "maddpg", "maddpg-l"])
    def test_learner_update(self, algorithm):
        """Test one full update: losses are finite and targets move by tau."""
        learner = tiny_learner(algorithm, OBS_DIMS, tau=0.5)
        target_before = copy_params(learner.nets[0].target_actor)
        losses = learner.update(synthetic_batch(OBS_DIMS), 0)

        assert np.isfinite(losses.critic) and np.isfinite(losses.actor)
        assert learner.updates_done == 1
        expected = 0.5 * target_before["W0"] + 0.5 * learner.nets[0].actor["W0"]
        np.testing.assert_allclose(learner.nets[0].target_actor["W0"], expected, atol=1e-15)

    def test_lstm_learner_update(self):
        learner = tiny_learner("maddpg-lstm", OBS_DIMS, seq_length=3)
        losses = learner.update(synthetic_batch(OBS_DIMS, seq_length=3), 0)
        assert np.isfinite(losses.critic)

    def test_single_step_lstm_update_is_maddpg(self):
        """With windows of length one the LSTM-actor learner runs plain MADDPG updates."""
        learner = tiny_learner("maddpg-lstm", OBS_DIMS, seq_length=1)
        reference = copy.deepcopy(learner)
        batch = synthetic_batch(OBS_DIMS, seq_length=1)

        learner.update(batch, 0)
        for a in range(reference.n_agents):
            maddpg_update(a, batch, reference.nets, reference.cfg)
        reference.soft_update_targets()

        expected = reference.state_arrays()
        for name, value in learner.state_arrays().items():
            assert value.tobytes() == expected[name].tobytes(), name

    def test_act_is_bounded(self):
        learner = tiny_learner("maddpg", OBS_DIMS)
        for action in learner.act([np.full(5, 50.0)] * 3):
            assert action.shape == (2,)
            assert np.all(np.abs(action) <= 1.0)


class TestAlgoConfig:
    @pytest.mark.parametrize("field, value", [("mixer", "vdn"), ("staged_watershed", 10)])
    def test_facmac_fields_rejected_elsewhere(self, field, value):
        with pytest.raises(ValidationError, match="only used by facmac"):
            AlgoConfig(algorithm="maddpg", **{field: value})

    def test_facmac_gets_default_mixer(self):
        assert AlgoConfig(algorithm="facmac").mixer == DEFAULT_MIXER

    def test_run_config_drops_mixer_for_other_algorithms(self):
        cfg = RunConfig(algo="maddpg-l", mixer="vdn").algo_config()
        assert cfg.mixer is None
        assert cfg.staged_watershed is None


def constructed_critic(learner, agent, columns):
    """Overwrite agent's critic with one computing exactly Q = u_agent[0]."""
    critic = {name: np.zeros_like(value) for name, value in learner.nets[agent].critic.items()}
    critic["W0"][columns.start, 0] = 1.0
    critic["b0"][0] = 2.0
    critic["W1"][0, 0] = 1.0
    critic["W2"][0, 0] = 1.0
    critic["b2"][0] = -2.0
    learner.nets[agent].critic.update(critic)


class TestActorGradient:
    def test_gradient_ascends_critic(self):
        """With Q = u[0] the actor step raises the first action component."""
        learner = tiny_learner("maddpg", OBS_DIMS, seed=4)
        batch = synthetic_batch(OBS_DIMS, seed=5)
        _, columns = critic_inputs(CriticLayout.JOINT, batch.state, batch.obs[1], batch.actions, 1)
        constructed_critic(learner, 1, columns)
        before = learner.nets[1].act(batch.obs[1])[0][:, 0].mean()

        loss, grads = actor_loss(1, batch, learner.nets, CriticLayout.JOINT)
        assert loss == pytest.approx(-before, abs=1e-12)
        assert any(np.any(g != 0) for g in grads.values())

        for name, grad in grads.items():
            learner.nets[1].actor[name] -= 1e-3 * grad
        assert learner.nets[1].act(batch.obs[1])[0][:, 0].mean() > before

    @pytest.mark.parametrize("algorithm", ["maddpg", "maddpg-l", "iddpg"])
    def test_critic_blind_to_own_action(self, algorithm):
        """A critic constant in u_a gives the actor nothing to follow."""
        learner = tiny_learner(algorithm, OBS_DIMS, seed=4)
        batch = synthetic_batch(OBS_DIMS, seed=5)
        layout = LAYOUTS[algorithm]
        _, columns = critic_inputs(layout, batch.state, batch.obs[1], batch.actions, 1)
        learner.nets[1].critic["W0"][columns, :] = 0.0

        _, grads = actor_loss(1, batch, learner.nets, layout)
        for grad in grads.values():
            np.testing.assert_array_equal(grad, np.zeros_like(grad))



class TestStateArrays:
    def test_load_roundtrip(self):
        source = tiny_learner("maddpg", OBS_DIMS, seed=1)
        sink = tiny_learner("maddpg", OBS_DIMS, seed=2)
        sink.load_arrays({name: value.copy() for name, value in source.state_arrays().items()})

        for name, value in source.state_arrays().items():
            np.testing.assert_array_equal(sink.state_arrays()[name], value)

    def test_names_must_match(self):
        source = tiny_learner("iddpg", OBS_DIMS)
        sink = tiny_learner("facmac", OBS_DIMS, mixer="monotonic")
        with pytest.raises(CheckpointIncompatibleError, match="parameter names differ"):
            sink.load_arrays(source.state_arrays())

    def test_shapes_must_match(self):
        source = tiny_learner("maddpg", OBS_DIMS)
        sink = tiny_learner("maddpg-l", OBS_DIMS)
        with pytest.raises(CheckpointIncompatibleError, match="has shape"):
            sink.load_arrays(source.state_arrays())
