import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from marl_avoidance.harness.presets import preset, scale_preset
from marl_avoidance.logging import logger
from marl_avoidance.models.run import RunConfig
from marl_avoidance.utils import get_config, validate_model_config

RESOLVED_NAME = "config.resolved"


def load_config(
    path: Optional[Union[str, Path]] = None, overrides: Optional[Dict[str, Any]] = None
) -> RunConfig:
    """
    Resolve a run configuration.

    Precedence, lowest first: model defaults, scenario preset, file, overrides.
    The scenario preset applies only when the file or the overrides name a
    scenario; otherwise the model defaults stand. Keys in the file and in
    ``overrides`` use the config-file names.
    """
    file_values = get_config(str(path)) if path is not None else {}
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    scenario = overrides.get("scenario", file_values.get("scenario"))
    scale = str(overrides.get("scale", file_values.get("scale", RunConfig().scale)))

    merged: Dict[str, Any] = {}
    merged.update(preset(str(scenario), scale) if scenario is not None else scale_preset(scale))
    merged.update(file_values)
    merged.update(overrides)
    config = validate_model_config(merged, RunConfig)
    logger.info(f"Resolved config for {config.scenario}/{config.algo}, seed {config.seed}")
    return config


def write_resolved(config: RunConfig, out_dir: Union[str, Path]) -> str:
    """Write the resolved config as YAML; the file is itself a valid --config input."""
    os.makedirs(out_dir, exist_ok=True)
    target = os.path.join(str(out_dir), RESOLVED_NAME)
    with open(target, "w") as f:
        yaml.safe_dump(config.to_resolved(), f, sort_keys=True, default_flow_style=False)
    return target


def read_resolved(path: Union[str, Path]) -> RunConfig:
    return validate_model_config(get_config(str(path)), RunConfig)
