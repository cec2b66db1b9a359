"""
Mixing functions that combine per-agent values into a joint value.

The hypernetwork mixer produces its two mixing layers from the state::

    hidden = elu(q @ W1(s) + b1(s))
    q_tot  = hidden . w2(s) + b2(s)

``W1`` and ``w2`` pass through ``abs`` in the monotonic variant, which makes
dq_tot/dq_a >= 0 for every agent. ``b2`` is a two-layer ReLU network.
"""

from dataclasses import dataclass
from typing import Literal, Optional, Tuple

import numpy as np

from marl_avoidance.errors import InputError, ShapeMismatchError
from marl_avoidance.nn.activations import elu, elu_grad, relu, relu_grad
from marl_avoidance.nn.mlp import Params

MixerKind = Literal["vdn", "monotonic", "nonmonotonic"]

MIXER_KINDS = ("vdn", "monotonic", "nonmonotonic")


@dataclass
class MixerCache:
    kind: str
    n_agents: int
    state: Optional[np.ndarray] = None
    qs: Optional[np.ndarray] = None
    w1_raw: Optional[np.ndarray] = None
    w1: Optional[np.ndarray] = None
    hidden_pre: Optional[np.ndarray] = None
    hidden: Optional[np.ndarray] = None
    w2_raw: Optional[np.ndarray] = None
    w2: Optional[np.ndarray] = None
    v_pre: Optional[np.ndarray] = None
    v_hidden: Optional[np.ndarray] = None
    params: Optional[Params] = None
    squeezed: bool = False


def mixer_vdn(local_qs) -> np.ndarray:
    """Exact sum over the last axis."""
    qs = np.asarray(local_qs, dtype=np.float64)
    if qs.size == 0 or qs.shape[-1] == 0:
        raise InputError("vdn mixer needs at least one local value")
    return qs.sum(axis=-1)


def init_mixer(state_dim: int, n_agents: int, embed: int, rng: np.random.Generator) -> Params:
    def layer(fan_in: int, fan_out: int) -> Tuple[np.ndarray, np.ndarray]:
        bound = 1.0 / np.sqrt(fan_in)
        return (
            rng.uniform(-bound, bound, size=(fan_in, fan_out)),
            rng.uniform(-bound, bound, size=(fan_out,)),
        )

    params: Params = {}
    params["hyper_w1.W"], params["hyper_w1.b"] = layer(state_dim, embed * n_agents)
    params["hyper_b1.W"], params["hyper_b1.b"] = layer(state_dim, embed)
    params["hyper_w2.W"], params["hyper_w2.b"] = layer(state_dim, embed)
    params["hyper_b2.W0"], params["hyper_b2.b0"] = layer(state_dim, embed)
    params["hyper_b2.W1"], params["hyper_b2.b1"] = layer(embed, 1)
    return params


def _mix(state, local_qs, params: Params, monotonic: bool) -> Tuple[np.ndarray, MixerCache]:
    state = np.asarray(state, dtype=np.float64)
    qs = np.asarray(local_qs, dtype=np.float64)
    squeezed = qs.ndim == 1
    if squeezed:
        state, qs = state[None], qs[None]
    if state.ndim != 2 or qs.ndim != 2 or state.shape[0] != qs.shape[0]:
        raise ShapeMismatchError(f"mixer got state {state.shape} and local values {qs.shape}")
    n = qs.shape[1]
    W1 = params["hyper_w1.W"]
    if W1.shape[0] != state.shape[1]:
        raise ShapeMismatchError(f"mixer expects state width {W1.shape[0]}, got {state.shape[1]}")
    embed = params["hyper_b1.b"].shape[0]
    if W1.shape[1] != embed * n:
        raise ShapeMismatchError(f"mixer was built for {W1.shape[1] // embed} agents, got {n}")

    cache = MixerCache(
        kind="monotonic" if monotonic else "nonmonotonic",
        n_agents=n,
        state=state,
        qs=qs,
        params=params,
        squeezed=squeezed,
    )
    cache.w1_raw = (state @ W1 + params["hyper_w1.b"]).reshape(-1, n, embed)
    cache.w1 = np.abs(cache.w1_raw) if monotonic else cache.w1_raw
    b1 = state @ params["hyper_b1.W"] + params["hyper_b1.b"]
    cache.hidden_pre = np.einsum("bn,bne->be", qs, cache.w1) + b1
    cache.hidden = elu(cache.hidden_pre)
    cache.w2_raw = state @ params["hyper_w2.W"] + params["hyper_w2.b"]
    cache.w2 = np.abs(cache.w2_raw) if monotonic else cache.w2_raw
    cache.v_pre = state @ params["hyper_b2.W0"] + params["hyper_b2.b0"]
    cache.v_hidden = relu(cache.v_pre)
    v = cache.v_hidden @ params["hyper_b2.W1"] + params["hyper_b2.b1"]
    q_tot = np.sum(cache.hidden * cache.w2, axis=1) + v[:, 0]
    return (q_tot[0] if squeezed else q_tot), cache


def mixer_monotonic(state, local_qs, params: Params) -> Tuple[np.ndarray, MixerCache]:
    return _mix(state, local_qs, params, monotonic=True)


def mixer_nonmonotonic(state, local_qs, params: Params) -> Tuple[np.ndarray, MixerCache]:
    return _mix(state, local_qs, params, monotonic=False)


def mixer_forward(kind: str, state, local_qs, params: Params) -> Tuple[np.ndarray, MixerCache]:
    if kind == "vdn":
        qs = np.asarray(local_qs, dtype=np.float64)
        return mixer_vdn(qs), MixerCache(kind="vdn", n_agents=qs.shape[-1], qs=qs, squeezed=qs.ndim == 1)
    if kind == "monotonic":
        return mixer_monotonic(state, local_qs, params)
    if kind == "nonmonotonic":
        return mixer_nonmonotonic(state, local_qs, params)
    raise InputError(f"unknown mixer kind '{kind}'")


def mixer_backward(cache: MixerCache, dq_tot) -> Tuple[np.ndarray, Params]:
    """Returns (d local values, hypernetwork gradients); the state is treated as data."""
    dq_tot = np.atleast_1d(np.asarray(dq_tot, dtype=np.float64))
    if cache.kind == "vdn":
        batch = 1 if cache.squeezed else cache.qs.shape[0]
        if dq_tot.shape != (batch,):
            raise ShapeMismatchError(f"expected {batch} joint-value gradients, got {dq_tot.shape}")
        dqs = np.repeat(dq_tot[:, None], cache.n_agents, axis=1)
        return (dqs[0] if cache.squeezed else dqs), {}

    if dq_tot.shape != (cache.state.shape[0],):
        raise ShapeMismatchError(f"expected {cache.state.shape[0]} joint-value gradients, got {dq_tot.shape}")
    monotonic = cache.kind == "monotonic"
    params, state = cache.params, cache.state
    grads: Params = {}

    dv = dq_tot[:, None]
    grads["hyper_b2.W1"] = cache.v_hidden.T @ dv
    grads["hyper_b2.b1"] = dv.sum(axis=0)
    dv_pre = (dv @ params["hyper_b2.W1"].T) * relu_grad(cache.v_pre)
    grads["hyper_b2.W0"] = state.T @ dv_pre
    grads["hyper_b2.b0"] = dv_pre.sum(axis=0)

    dw2 = dq_tot[:, None] * cache.hidden
    if monotonic:
        dw2 = dw2 * np.sign(cache.w2_raw)
    grads["hyper_w2.W"] = state.T @ dw2
    grads["hyper_w2.b"] = dw2.sum(axis=0)

    dhidden_pre = dq_tot[:, None] * cache.w2 * elu_grad(cache.hidden_pre)
    grads["hyper_b1.W"] = state.T @ dhidden_pre
    grads["hyper_b1.b"] = dhidden_pre.sum(axis=0)

    dw1 = np.einsum("bn,be->bne", cache.qs, dhidden_pre)
    if monotonic:
        dw1 = dw1 * np.sign(cache.w1_raw)
    dw1 = dw1.reshape(dw1.shape[0], -1)
    grads["hyper_w1.W"] = state.T @ dw1
    grads["hyper_w1.b"] = dw1.sum(axis=0)

    dqs = np.einsum("bne,be->bn", cache.w1, dhidden_pre)
    return (dqs[0] if cache.squeezed else dqs), grads
