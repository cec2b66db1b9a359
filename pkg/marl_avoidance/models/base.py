import hashlib
import json
from typing import Annotated, Any, Dict

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, PlainSerializer


def as_float_array(value: Any) -> np.ndarray:
    """Coerce lists/tuples/arrays into a float64 array (no copy if already one)."""
    array = np.asarray(value, dtype=np.float64)
    return array


def ensure_finite(array: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{what} contains non-finite values")
    return array


def _validate_vec2(value: Any) -> np.ndarray:
    array = ensure_finite(as_float_array(value), "Vec2")
    if array.shape != (2,):
        raise ValueError(f"Vec2 must have shape (2,), got {array.shape}")
    return array


def _validate_array(value: Any) -> np.ndarray:
    if not isinstance(value, (np.ndarray, list, tuple)):
        raise ValueError(f"Expected an array-like value, got {type(value)}")
    return ensure_finite(as_float_array(value), "array")


_to_list = PlainSerializer(lambda array: np.asarray(array).tolist(), return_type=list)

# 2D world-unit vector, finite by construction
Vec2 = Annotated[np.ndarray, BeforeValidator(_validate_vec2), _to_list]

# Finite float64 array of any shape
FiniteArray = Annotated[np.ndarray, BeforeValidator(_validate_array), _to_list]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ArrayModel(BaseModel):
    """Base for records that carry numpy arrays."""

    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)


def compute_digest(value: Dict[str, Any]) -> str:
    digest_str = json.dumps(value, sort_keys=True).encode("utf-8")
    return hashlib.sha256(digest_str).hexdigest()


def params_digest(params: Dict[str, np.ndarray]) -> str:
    """Hash a parameter map bit-exactly, keyed by name."""
    sha = hashlib.sha256()
    for name in sorted(params):
        sha.update(name.encode("utf-8"))
        sha.update(np.ascontiguousarray(params[name], dtype="<f8").tobytes())
    return sha.hexdigest()
