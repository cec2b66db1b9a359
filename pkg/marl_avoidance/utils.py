import os
import zlib
from typing import Any, Dict, Type

import numpy as np
import yaml
from pydantic import BaseModel, ValidationError, validate_call

from marl_avoidance.errors import ConfigurationError
from marl_avoidance.logging import logger


@validate_call
def get_config(filename: str) -> Dict[str, Any]:
    """
    Read a flat key-value YAML config file.
    """
    if not os.path.exists(filename):
        raise ConfigurationError(f"The file '{filename}' does not exist.", key="config")
    if not os.path.isfile(filename):
        raise ConfigurationError(f"'{filename}' is not a file.", key="config")
    with open(filename, "r") as f:
        yaml_data = yaml.safe_load(f)
    if yaml_data is None:
        return {}
    if not isinstance(yaml_data, dict):
        raise ConfigurationError("Invalid config file: expected a mapping.", key="config")
    for key, value in yaml_data.items():
        if isinstance(value, (dict, list)):
            raise ConfigurationError("nested values are not allowed", key=str(key))
    return yaml_data


def substitute_env_vars(config: Any) -> Any:
    """
    Substitute environment variables in string values of a flat mapping.
    """
    if isinstance(config, dict):
        return {k: substitute_env_vars(v) for k, v in config.items()}
    elif isinstance(config, str):
        return os.path.expandvars(config)
    else:
        return config


def validate_model_config(config: Dict[str, Any], pydantic_model: Type[BaseModel]) -> BaseModel:
    """
    Validate a resolved mapping into a pydantic model, naming offending keys on failure.
    """
    substituted_config = substitute_env_vars(config)
    logger.debug(f"Substituted config: {substituted_config}")
    try:
        data = pydantic_model.model_validate(substituted_config)
    except ValidationError as e:
        first = e.errors()[0]
        key = ".".join(str(part) for part in first.get("loc", ())) or None
        if first.get("type") == "extra_forbidden":
            raise ConfigurationError("unknown key", key=key) from e
        raise ConfigurationError(first.get("msg", str(e)), key=key) from e
    logger.debug(f"Resulting object model: {data}")
    return data


def to_plain(value: Any) -> Any:
    """Convert numpy scalars/arrays nested in dicts and lists into plain Python values."""
    if isinstance(value, dict):
        return {k: to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


def stable_name_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))
