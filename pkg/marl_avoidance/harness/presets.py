"""Per-scenario hyperparameters, at full scale and at desk scale."""

from typing import Any, Dict

from marl_avoidance.errors import ConfigurationError
from marl_avoidance.scenarios import SCENARIO_IDS

FULL_PRESETS: Dict[str, Dict[str, Any]] = {
    "obstacle-predator-prey": {
        "Num-adversaries": 1,
        "Lr-actor": 0.001,
        "Lr-critic": 0.01,
        "Batch-size": 256,
        "seq-length": 3,
    },
    "spread-3a": {
        "Num-adversaries": 0,
        "Lr-actor": 0.001,
        "Lr-critic": 0.01,
        "Batch-size": 128,
        "seq-length": 5,
    },
    "spread-6a": {
        "Num-adversaries": 0,
        "Lr-actor": 0.001,
        "Lr-critic": 0.01,
        "Batch-size": 32,
        "seq-length": 3,
    },
    "spread-9a": {
        "Num-adversaries": 0,
        "Lr-actor": 0.001,
        "Lr-critic": 0.01,
        "Batch-size": 32,
        "seq-length": 3,
    },
    "tunnel": {
        "Num-adversaries": 0,
        "Lr-actor": 0.001,
        "Lr-critic": 0.01,
        "Batch-size": 128,
        "seq-length": 5,
    },
    "simple-tunnel": {
        "Num-adversaries": 0,
        "Lr-actor": 0.001,
        "Lr-critic": 0.01,
        "Batch-size": 128,
        "seq-length": 5,
    },
    "simple-tunnel-6a": {
        "Num-adversaries": 0,
        "Lr-actor": 0.001,
        "Lr-critic": 0.001,
        "Batch-size": 32,
        "seq-length": 3,
    },
}

SCALE_OVERRIDES: Dict[str, Dict[str, Any]] = {
    "full": {"time-steps": 2_000_000},
    "desk": {"time-steps": 100_000},
}


def scale_preset(scale: str = "full") -> Dict[str, Any]:
    if scale not in SCALE_OVERRIDES:
        raise ConfigurationError(f"unknown scale '{scale}', expected full or desk", key="scale")
    return dict(SCALE_OVERRIDES[scale])


def preset(scenario: str, scale: str = "full") -> Dict[str, Any]:
    if scenario not in SCENARIO_IDS:
        raise ConfigurationError(f"unknown scenario '{scenario}'", key="scenario")
    values = dict(FULL_PRESETS[scenario])
    values.update(scale_preset(scale))
    return values
