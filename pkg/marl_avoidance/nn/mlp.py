from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import ConfigDict, Field, field_validator

from marl_avoidance.errors import ShapeMismatchError
from marl_avoidance.models.base import StrictModel
from marl_avoidance.nn.activations import relu, relu_grad

Params = Dict[str, np.ndarray]


class MLPSpec(StrictModel):
    """Dense network: ReLU between layers, identity or tanh on the output."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    widths: Tuple[int, ...] = Field(min_length=2)
    output_activation: Literal["identity", "tanh"] = "identity"

    @field_validator("widths")
    @classmethod
    def validate_widths(cls, v):
        if any(w <= 0 for w in v):
            raise ValueError("layer widths must be positive")
        return v

    @property
    def n_layers(self) -> int:
        return len(self.widths) - 1

    @property
    def input_dim(self) -> int:
        return self.widths[0]

    @property
    def output_dim(self) -> int:
        return self.widths[-1]


@dataclass
class MLPCache:
    spec: MLPSpec
    prefix: str
    weights: List[np.ndarray]
    inputs: List[np.ndarray] = field(default_factory=list)
    pre_activations: List[np.ndarray] = field(default_factory=list)
    output: Optional[np.ndarray] = None
    squeezed: bool = False


def init_mlp(spec: MLPSpec, rng: np.random.Generator, prefix: str = "") -> Params:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases."""
    params: Params = {}
    for i in range(spec.n_layers):
        fan_in, fan_out = spec.widths[i], spec.widths[i + 1]
        bound = 1.0 / np.sqrt(fan_in)
        params[f"{prefix}W{i}"] = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        params[f"{prefix}b{i}"] = rng.uniform(-bound, bound, size=(fan_out,))
    return params


def mlp_forward(spec: MLPSpec, params: Params, x, prefix: str = "") -> Tuple[np.ndarray, MLPCache]:
    x = np.asarray(x, dtype=np.float64)
    squeezed = x.ndim == 1
    if squeezed:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise ShapeMismatchError(f"expected input width {spec.input_dim}, got shape {x.shape}")

    weights = []
    cache = MLPCache(spec=spec, prefix=prefix, weights=weights, squeezed=squeezed)
    h = x
    for i in range(spec.n_layers):
        W, b = params[f"{prefix}W{i}"], params[f"{prefix}b{i}"]
        if W.shape != (spec.widths[i], spec.widths[i + 1]) or b.shape != (spec.widths[i + 1],):
            raise ShapeMismatchError(f"layer {prefix}{i} parameters do not match {spec.widths}")
        weights.append(W)
        cache.inputs.append(h)
        pre = h @ W + b
        cache.pre_activations.append(pre)
        if i < spec.n_layers - 1:
            h = relu(pre)
        elif spec.output_activation == "tanh":
            h = np.tanh(pre)
        else:
            h = pre
    cache.output = h
    return (h[0] if squeezed else h), cache


def mlp_backward(cache: MLPCache, dout) -> Tuple[np.ndarray, Params]:
    """Gradients for a cached forward pass; parameter gradients are summed over the batch."""
    dout = np.asarray(dout, dtype=np.float64)
    if cache.squeezed and dout.ndim == 1:
        dout = dout[None, :]
    if dout.shape != cache.output.shape:
        raise ShapeMismatchError(
            f"output gradient shape {dout.shape} does not match cached output {cache.output.shape}"
        )
    spec, prefix = cache.spec, cache.prefix
    grads: Params = {}
    last = spec.n_layers - 1
    if spec.output_activation == "tanh":
        delta = dout * (1.0 - cache.output**2)
    else:
        delta = dout
    for i in range(last, -1, -1):
        if i < last:
            delta = delta * relu_grad(cache.pre_activations[i])
        grads[f"{prefix}W{i}"] = cache.inputs[i].T @ delta
        grads[f"{prefix}b{i}"] = delta.sum(axis=0)
        delta = delta @ cache.weights[i].T
    dx = delta[0] if cache.squeezed else delta
    return dx, grads
