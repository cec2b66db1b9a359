import numpy as np
import pytest
from pydantic import ValidationError

from marl_avoidance.errors import InputError, NonFiniteGradientError, ShapeMismatchError
from marl_avoidance.nn.gradcheck import grad_check, grad_check_detailed
from marl_avoidance.nn.lstm import (
    LSTMActorSpec,
    LSTMState,
    init_lstm,
    init_lstm_actor,
    lstm_actor_backward,
    lstm_actor_forward,
    lstm_step,
)
from marl_avoidance.nn.mlp import MLPSpec, init_mlp, mlp_backward, mlp_forward
from marl_avoidance.nn.optim import AdamState, adam_step, copy_params, soft_update


def mlp_loss(spec, x):
    def fn(params):
        out, cache = mlp_forward(spec, params, x)
        _, grads = mlp_backward(cache, out)
        return 0.5 * float(np.sum(out * out)), grads

    return fn


def lstm_loss(spec, window, weights):
    def fn(params):
        action, cache = lstm_actor_forward(spec, params, window)
        _, grads = lstm_actor_backward(cache, weights)
        return float(np.sum(action * weights)), grads

    return fn


class TestMLP:
    def test_forward_shapes(self):
        spec = MLPSpec(widths=(5, 8, 2), output_activation="tanh")
        params = init_mlp(spec, np.random.default_rng(0))

        single, _ = mlp_forward(spec, params, np.ones(5))
        batch, _ = mlp_forward(spec, params, np.ones((7, 5)))

        assert single.shape == (2,)
        assert batch.shape == (7, 2)
        assert np.all(np.abs(batch) < 1.0)

    def test_init_is_deterministic(self):
        spec = MLPSpec(widths=(3, 4, 1))
        a = init_mlp(spec, np.random.default_rng(1))
        b = init_mlp(spec, np.random.default_rng(1))
        for name in a:
            np.testing.assert_array_equal(a[name], b[name])

    def test_input_width_mismatch(self):
        spec = MLPSpec(widths=(3, 4, 1))
        params = init_mlp(spec, np.random.default_rng(0))
        with pytest.raises(ShapeMismatchError, match="input width"):
            mlp_forward(spec, params, np.ones(4))

    def test_invalid_widths(self):
        with pytest.raises(ValidationError):
            MLPSpec(widths=(3, 0, 1))

    @pytest.mark.parametrize("activation", ["identity", "tanh"])
    def test_gradients_match_finite_differences(self, activation):
        rng = np.random.default_rng(3)
        spec = MLPSpec(widths=(4, 6, 6, 3), output_activation=activation)
        params = init_mlp(spec, rng)
        x = rng.normal(size=(5, 4))

        assert grad_check(mlp_loss(spec, x), params, sample_count=64, rng=rng) < 1e-4

    def test_grad_check_restores_parameters(self):
        rng = np.random.default_rng(3)
        spec = MLPSpec(widths=(4, 6, 3))
        params = init_mlp(spec, rng)
        before = copy_params(params)
        grad_check(mlp_loss(spec, rng.normal(size=(2, 4))), params, sample_count=32, rng=rng)

        for name in params:
            assert params[name].tobytes() == before[name].tobytes()

    def test_grad_check_detects_perturbation(self):
        rng = np.random.default_rng(3)
        spec = MLPSpec(widths=(4, 6, 3))
        params = init_mlp(spec, rng)
        error = grad_check(mlp_loss(spec, rng.normal(size=(5, 4))), params, sample_count=64, rng=rng, perturb=1e-2)

        assert error > 1e-4

    def test_grad_check_retries_at_smaller_step(self):
        """Near a kink the error at h is large; the retry at h/10 is accepted and both are reported."""

        def relu(params):
            x = params["x"]
            return float(np.maximum(x, 0.0).sum()), {"x": (x > 0).astype(np.float64)}

        result = grad_check_detailed(relu, {"x": np.array([5e-6])}, sample_count=1)

        assert result.retried == 1
        assert result.worst_at_h == pytest.approx(0.25, rel=1e-3)
        assert result.worst < 1e-4
        assert "h/10" in result.describe(1e-5)
        assert "1 of 1" in result.describe(1e-5)


class TestLSTMStep:
    def test_zero_parameters_keep_zero_state(self):
        """Gates sit at 0.5 and g at 0, so a zero state stays zero."""
        params = {name: np.zeros_like(value) for name, value in init_lstm(3, 4, np.random.default_rng(0)).items()}
        state, cache = lstm_step(np.ones((2, 3)), LSTMState.zeros(4, 2), params)

        np.testing.assert_array_equal(state.h, np.zeros((2, 4)))
        np.testing.assert_array_equal(state.c, np.zeros((2, 4)))
        np.testing.assert_array_equal(cache.i, np.full((2, 4), 0.5))
        np.testing.assert_array_equal(cache.g, np.zeros((2, 4)))

    def test_saturated_forget_gate_accumulates(self):
        """With forget bias +20 the cell keeps its content: c' = c + i * g."""
        rng = np.random.default_rng(1)
        params = init_lstm(3, 4, rng)
        params["lstm.b"][4:8] = 20.0
        params["lstm.Wx"][:, 4:8] = 0.0
        params["lstm.Wh"][:, 4:8] = 0.0
        previous = LSTMState(h=rng.normal(size=(2, 4)), c=rng.normal(size=(2, 4)))
        state, cache = lstm_step(rng.normal(size=(2, 3)), previous, params)

        np.testing.assert_allclose(state.c, previous.c + cache.i * cache.g, atol=1e-7)

    def test_step_shape_mismatch(self):
        params = init_lstm(3, 4, np.random.default_rng(0))
        with pytest.raises(ShapeMismatchError, match="lstm step"):
            lstm_step(np.ones((1, 5)), LSTMState.zeros(4, 1), params)


class TestLSTMActor:
    def test_window_shapes(self):
        spec = LSTMActorSpec(input_dim=4, hidden=6, dense=5)
        params = init_lstm_actor(spec, np.random.default_rng(0))

        single, _ = lstm_actor_forward(spec, params, np.zeros((3, 4)))
        batch, _ = lstm_actor_forward(spec, params, np.zeros((2, 3, 4)))

        assert single.shape == (2,)
        assert batch.shape == (2, 2)

    def test_empty_window_rejected(self):
        spec = LSTMActorSpec(input_dim=4, hidden=6, dense=5)
        params = init_lstm_actor(spec, np.random.default_rng(0))
        with pytest.raises(InputError, match="at least one step"):
            lstm_actor_forward(spec, params, np.zeros((0, 4)))

    def test_history_matters(self):
        """Older window rows change the action."""
        rng = np.random.default_rng(2)
        spec = LSTMActorSpec(input_dim=4, hidden=6, dense=5)
        params = init_lstm_actor(spec, rng)
        window = rng.normal(size=(3, 4))
        altered = window.copy()
        altered[0] += 1.0

        a, _ = lstm_actor_forward(spec, params, window)
        b, _ = lstm_actor_forward(spec, params, altered)
        assert not np.allclose(a, b)

    def test_unrolled_gradients(self):
        rng = np.random.default_rng(4)
        spec = LSTMActorSpec(input_dim=3, hidden=5, dense=4)
        params = init_lstm_actor(spec, rng)
        window = rng.normal(size=(2, 4, 3))
        weights = rng.normal(size=(2, 2))

        assert grad_check(lstm_loss(spec, window, weights), params, sample_count=64, rng=rng) < 1e-4

    def test_no_recurrence_equals_feed_forward(self):
        """Without recurrent weights and with the forget gate shut, a constant window acts like one step."""
        rng = np.random.default_rng(5)
        spec = LSTMActorSpec(input_dim=3, hidden=4, dense=5)
        params = init_lstm_actor(spec, rng)
        params["lstm.Wh"][...] = 0.0
        params["lstm.Wx"][:, 4:8] = 0.0
        params["lstm.b"][4:8] = -50.0
        obs = rng.normal(size=3)

        z = obs @ params["lstm.Wx"] + params["lstm.b"]
        i, g, o = 1.0 / (1.0 + np.exp(-z[:4])), np.tanh(z[8:12]), 1.0 / (1.0 + np.exp(-z[12:]))
        expected, _ = mlp_forward(spec.head, params, o * np.tanh(i * g), prefix="head.")
        action, _ = lstm_actor_forward(spec, params, np.tile(obs, (4, 1)))

        np.testing.assert_allclose(action, expected, atol=1e-12)

    def test_single_step_window_is_memoryless(self):
        rng = np.random.default_rng(6)
        spec = LSTMActorSpec(input_dim=3, hidden=4, dense=5)
        params = init_lstm_actor(spec, rng)
        obs = rng.normal(size=(7, 3))

        batched, _ = lstm_actor_forward(spec, params, obs[:, None, :])
        for row, action in zip(obs, batched):
            single, _ = lstm_actor_forward(spec, params, row[None, :])
            np.testing.assert_allclose(action, single, atol=1e-12)



class TestOptim:
    def test_adam_first_step_is_sign_scaled(self):
        """The bias-corrected first step moves each entry by about lr against its gradient sign."""
        params = {"w": np.array([1.0, -1.0, 0.5])}
        grads = {"w": np.array([0.3, -2.0, 1e-3])}
        adam_step(params, grads, AdamState.for_params(params), lr=0.01)

        np.testing.assert_allclose(params["w"], [0.99, -0.99, 0.49], rtol=1e-5)

    def test_adam_rejects_non_finite(self):
        params = {"w": np.array([1.0, 2.0])}
        state = AdamState.for_params(params)
        with pytest.raises(NonFiniteGradientError, match="'w'"):
            adam_step(params, {"w": np.array([np.inf, 0.0])}, state, lr=0.1)

        np.testing.assert_array_equal(params["w"], [1.0, 2.0])
        assert state.step == 0

    def test_adam_zero_gradient_leaves_params(self):
        params = {"w": np.array([1.0, -2.0, 0.5]), "b": np.array([0.25])}
        before = copy_params(params)
        state = AdamState.for_params(params)
        adam_step(params, {name: np.zeros_like(value) for name, value in params.items()}, state, lr=0.1)

        for name in params:
            np.testing.assert_array_equal(params[name], before[name])
        assert state.step == 1

    def test_adam_key_mismatch(self):
        params = {"w": np.zeros(2)}
        with pytest.raises(ShapeMismatchError, match="keys"):
            adam_step(params, {"v": np.zeros(2)}, AdamState.for_params(params), lr=0.1)

    @pytest.mark.parametrize("tau, expected", [(0.0, 0.0), (1.0, 4.0), (0.25, 1.0)])
    def test_soft_update(self, tau, expected):
        target = {"w": np.zeros(3)}
        soft_update(target, {"w": np.full(3, 4.0)}, tau)
        np.testing.assert_allclose(target["w"], expected)

    def test_soft_update_rejects_tau(self):
        with pytest.raises(InputError, match="tau"):
            soft_update({"w": np.zeros(1)}, {"w": np.zeros(1)}, 1.5)

    def test_copy_params_is_deep(self):
        params = {"w": np.zeros(2)}
        copied = copy_params(params)
        copied["w"][0] = 1.0
        assert params["w"][0] == 0.0
