"""
LSTM cell and the windowed LSTM actor.

Gate blocks inside ``Wx``, ``Wh`` and ``b`` are ordered input, forget, cell, output.
The actor starts every window from a zero state, unrolls the LSTM oldest to
newest, and maps the final hidden vector through a ReLU layer and a tanh head.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from pydantic import ConfigDict, Field, model_validator

from marl_avoidance.errors import InputError, ShapeMismatchError
from marl_avoidance.models.base import ArrayModel, FiniteArray, StrictModel
from marl_avoidance.nn.activations import sigmoid
from marl_avoidance.nn.mlp import MLPCache, MLPSpec, Params, init_mlp, mlp_backward, mlp_forward

LSTM_PREFIX = "lstm."
HEAD_PREFIX = "head."
FORGET_BIAS = 1.0


class LSTMState(ArrayModel):
    h: FiniteArray
    c: FiniteArray

    @model_validator(mode="after")
    def check_shapes(self):
        if self.h.shape != self.c.shape:
            raise ValueError(f"h {self.h.shape} and c {self.c.shape} must have equal shapes")
        return self

    @classmethod
    def zeros(cls, hidden: int, batch: int) -> "LSTMState":
        return cls(h=np.zeros((batch, hidden)), c=np.zeros((batch, hidden)))


@dataclass
class LSTMStepCache:
    x: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    i: np.ndarray
    f: np.ndarray
    g: np.ndarray
    o: np.ndarray
    c: np.ndarray
    tanh_c: np.ndarray
    Wx: np.ndarray
    Wh: np.ndarray


def init_lstm(input_dim: int, hidden: int, rng: np.random.Generator, prefix: str = LSTM_PREFIX) -> Params:
    bound_x = 1.0 / np.sqrt(input_dim)
    bound_h = 1.0 / np.sqrt(hidden)
    b = rng.uniform(-bound_h, bound_h, size=(4 * hidden,))
    b[hidden : 2 * hidden] += FORGET_BIAS
    return {
        f"{prefix}Wx": rng.uniform(-bound_x, bound_x, size=(input_dim, 4 * hidden)),
        f"{prefix}Wh": rng.uniform(-bound_h, bound_h, size=(hidden, 4 * hidden)),
        f"{prefix}b": b,
    }


def lstm_step(x, state: LSTMState, params: Params, prefix: str = LSTM_PREFIX) -> Tuple[LSTMState, LSTMStepCache]:
    Wx, Wh, b = params[f"{prefix}Wx"], params[f"{prefix}Wh"], params[f"{prefix}b"]
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    h_prev, c_prev = np.atleast_2d(state.h), np.atleast_2d(state.c)
    hidden = Wh.shape[0]
    if x.shape[1] != Wx.shape[0] or h_prev.shape[1] != hidden or x.shape[0] != h_prev.shape[0]:
        raise ShapeMismatchError(
            f"lstm step got x {x.shape} and h {h_prev.shape} for Wx {Wx.shape}, Wh {Wh.shape}"
        )
    z = x @ Wx + h_prev @ Wh + b
    i = sigmoid(z[:, :hidden])
    f = sigmoid(z[:, hidden : 2 * hidden])
    g = np.tanh(z[:, 2 * hidden : 3 * hidden])
    o = sigmoid(z[:, 3 * hidden :])
    c = f * c_prev + i * g
    tanh_c = np.tanh(c)
    h = o * tanh_c
    cache = LSTMStepCache(x, h_prev, c_prev, i, f, g, o, c, tanh_c, Wx, Wh)
    return LSTMState(h=h, c=c), cache


def lstm_step_backward(
    dh: np.ndarray, dc: np.ndarray, cache: LSTMStepCache, prefix: str = LSTM_PREFIX
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, Params]:
    """Returns (dx, dh_prev, dc_prev, parameter gradients) for one cell step."""
    if dh.shape != cache.c.shape or dc.shape != cache.c.shape:
        raise ShapeMismatchError(f"state gradients {dh.shape}/{dc.shape} vs cached {cache.c.shape}")
    do = dh * cache.tanh_c
    dc_total = dc + dh * cache.o * (1.0 - cache.tanh_c**2)
    di = dc_total * cache.g
    df = dc_total * cache.c_prev
    dg = dc_total * cache.i
    dz = np.concatenate(
        [
            di * cache.i * (1.0 - cache.i),
            df * cache.f * (1.0 - cache.f),
            dg * (1.0 - cache.g**2),
            do * cache.o * (1.0 - cache.o),
        ],
        axis=1,
    )
    grads = {
        f"{prefix}Wx": cache.x.T @ dz,
        f"{prefix}Wh": cache.h_prev.T @ dz,
        f"{prefix}b": dz.sum(axis=0),
    }
    return dz @ cache.Wx.T, dz @ cache.Wh.T, dc_total * cache.f, grads


class LSTMActorSpec(StrictModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    input_dim: int = Field(gt=0)
    hidden: int = Field(default=64, gt=0)
    dense: int = Field(default=64, gt=0)
    output_dim: int = Field(default=2, gt=0)

    @property
    def head(self) -> MLPSpec:
        return MLPSpec(widths=(self.hidden, self.dense, self.output_dim), output_activation="tanh")


@dataclass
class LSTMActorCache:
    spec: LSTMActorSpec
    steps: List[LSTMStepCache] = field(default_factory=list)
    head: Optional[MLPCache] = None
    squeezed: bool = False


def init_lstm_actor(spec: LSTMActorSpec, rng: np.random.Generator) -> Params:
    params = init_lstm(spec.input_dim, spec.hidden, rng)
    params.update(init_mlp(spec.head, rng, prefix=HEAD_PREFIX))
    return params


def lstm_actor_forward(spec: LSTMActorSpec, params: Params, window) -> Tuple[np.ndarray, LSTMActorCache]:
    """Action for an observation window shaped (T, d) or (B, T, d), oldest first."""
    window = np.asarray(window, dtype=np.float64)
    squeezed = window.ndim == 2
    if squeezed:
        window = window[None]
    if window.ndim != 3 or window.shape[1] == 0:
        raise InputError(f"observation window must hold at least one step, got shape {window.shape}")
    if window.shape[2] != spec.input_dim:
        raise ShapeMismatchError(f"expected observations of width {spec.input_dim}, got {window.shape[2]}")

    cache = LSTMActorCache(spec=spec, squeezed=squeezed)
    state = LSTMState.zeros(spec.hidden, window.shape[0])
    for t in range(window.shape[1]):
        state, step_cache = lstm_step(window[:, t, :], state, params)
        cache.steps.append(step_cache)
    action, cache.head = mlp_forward(spec.head, params, state.h, prefix=HEAD_PREFIX)
    return (action[0] if squeezed else action), cache


def lstm_actor_backward(cache: LSTMActorCache, daction) -> Tuple[np.ndarray, Params]:
    """Backpropagate through the head and every unrolled step; returns (dwindow, grads)."""
    daction = np.asarray(daction, dtype=np.float64)
    if cache.squeezed and daction.ndim == 1:
        daction = daction[None]
    dh, grads = mlp_backward(cache.head, daction)
    dc = np.zeros_like(dh)
    dxs = []
    for step_cache in reversed(cache.steps):
        dx, dh, dc, step_grads = lstm_step_backward(dh, dc, step_cache)
        dxs.append(dx)
        for name, value in step_grads.items():
            grads[name] = grads[name] + value if name in grads else value
    dwindow = np.stack(dxs[::-1], axis=1)
    return (dwindow[0] if cache.squeezed else dwindow), grads
