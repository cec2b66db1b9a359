import numpy as np
import pytest

from marl_avoidance.env import ParticleEnv
from marl_avoidance.errors import InputError
from marl_avoidance.scenarios import build_spec, observation_dims


class TestParticleEnv:
    def test_step_before_reset(self):
        env = ParticleEnv(build_spec("spread", 3), np.random.default_rng(0))
        with pytest.raises(InputError, match="reset"):
            env.step([np.zeros(2)] * 3)

    def test_reset_observations(self):
        """Test that reset returns one observation per learner with layout widths."""
        spec = build_spec("obstacle-predator-prey", 3)
        obs = ParticleEnv(spec, np.random.default_rng(0)).reset()

        assert [o.shape[0] for o in obs] == observation_dims(spec)

    def test_episode_terminates(self):
        """Test that episodes end after max_episode_len steps."""
        env = ParticleEnv(build_spec("spread", 3, max_episode_len=4), np.random.default_rng(0))
        env.reset()
        flags = [env.step([np.zeros(2)] * 3)[2] for _ in range(4)]

        assert flags == [False, False, False, True]

    def test_same_seed_same_trajectory(self):
        """Test that two environments with one seed produce identical rollouts."""
        spec = build_spec("spread", 3)
        actions = [np.array([0.5, -0.2]), np.array([-1.0, 1.0]), np.array([0.0, 0.3])]
        runs = []
        for _ in range(2):
            env = ParticleEnv(spec, np.random.default_rng(42))
            env.reset()
            runs.append([env.step(actions)[1] for _ in range(10)])

        np.testing.assert_array_equal(np.array(runs[0]), np.array(runs[1]))

    def test_state_is_concatenated_observations(self):
        spec = build_spec("tunnel", 3)
        env = ParticleEnv(spec, np.random.default_rng(0))
        obs = env.reset()

        np.testing.assert_array_equal(env.state(), np.concatenate(obs))

    def test_episode_index_advances(self):
        env = ParticleEnv(build_spec("spread", 3), np.random.default_rng(0))
        env.reset()
        env.reset()

        assert env.world.episode_index == 1
        assert env.world.step_index == 0

    def test_action_out_of_range(self):
        env = ParticleEnv(build_spec("spread", 3), np.random.default_rng(0))
        env.reset()
        with pytest.raises(InputError):
            env.step([np.array([2.0, 0.0])] * 3)
