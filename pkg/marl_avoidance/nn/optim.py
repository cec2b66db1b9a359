from typing import Dict

import numpy as np
from pydantic import Field

from marl_avoidance.errors import InputError, NonFiniteGradientError, ShapeMismatchError
from marl_avoidance.models.base import ArrayModel
from marl_avoidance.nn.mlp import Params


class AdamState(ArrayModel):
    m: Dict[str, np.ndarray]
    v: Dict[str, np.ndarray]
    step: int = Field(default=0, ge=0)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: Params) -> "AdamState":
        return cls(
            m={name: np.zeros_like(value) for name, value in params.items()},
            v={name: np.zeros_like(value) for name, value in params.items()},
        )


def _check_keys(expected: Params, given: Params, what: str) -> None:
    if set(expected) != set(given):
        missing = sorted(set(expected) ^ set(given))
        raise ShapeMismatchError(f"{what} keys differ from parameters: {missing}")
    for name, value in given.items():
        if value.shape != expected[name].shape:
            raise ShapeMismatchError(f"{what} '{name}' has shape {value.shape}, expected {expected[name].shape}")


def adam_step(params: Params, grads: Params, state: AdamState, lr: float) -> Params:
    """Bias-corrected Adam descent, applied in place. Rejects non-finite gradients before touching anything."""
    _check_keys(params, grads, "gradient")
    for name, grad in grads.items():
        if not np.all(np.isfinite(grad)):
            raise NonFiniteGradientError(f"gradient '{name}' contains non-finite values")

    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step
    for name in sorted(params):
        grad = grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * grad * grad
        params[name] -= lr * (m / correction1) / (np.sqrt(v / correction2) + state.eps)
    return params


def soft_update(target: Params, online: Params, tau: float) -> Params:
    """target <- (1 - tau) * target + tau * online, in place."""
    if not 0.0 <= tau <= 1.0:
        raise InputError(f"tau must lie in [0, 1], got {tau}")
    _check_keys(target, online, "online parameter")
    for name in sorted(target):
        target[name] *= 1.0 - tau
        target[name] += tau * online[name]
    return target


def copy_params(params: Params) -> Params:
    return {name: value.copy() for name, value in params.items()}
