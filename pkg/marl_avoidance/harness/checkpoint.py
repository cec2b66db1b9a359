"""
Versioned parameter checkpoints.

File layout::

    b"MARLCKPT" | uint32 version | uint64 payload length | sha256(payload) | payload

    payload = uint64 header length | JSON header | raw little-endian float64 arrays

The JSON header carries the metadata and, per array, its name, shape and byte
offset. Keys are sorted so identical inputs give identical bytes.
"""

import hashlib
import json
import os
import struct
from typing import Any, Dict, Tuple

import numpy as np

from marl_avoidance.errors import CheckpointError, CheckpointIncompatibleError
from marl_avoidance.logging import logger

MAGIC = b"MARLCKPT"
FORMAT_VERSION = 1
CHECKPOINT_NAME = "checkpoint.bin"

_PREAMBLE = struct.Struct("<8sIQ32s")


def encode_checkpoint(arrays: Dict[str, np.ndarray], metadata: Dict[str, Any]) -> bytes:
    table = []
    blobs = []
    offset = 0
    for name in sorted(arrays):
        blob = np.ascontiguousarray(arrays[name], dtype="<f8").tobytes()
        table.append({"name": name, "shape": list(np.shape(arrays[name])), "offset": offset})
        blobs.append(blob)
        offset += len(blob)
    header = json.dumps({"metadata": metadata, "arrays": table}, sort_keys=True).encode("utf-8")
    payload = struct.pack("<Q", len(header)) + header + b"".join(blobs)
    digest = hashlib.sha256(payload).digest()
    return _PREAMBLE.pack(MAGIC, FORMAT_VERSION, len(payload), digest) + payload


def decode_checkpoint(data: bytes) -> Tuple[Dict[str, np.ndarray], Dict[str, Any]]:
    if len(data) < _PREAMBLE.size:
        raise CheckpointError("checkpoint is truncated")
    magic, version, length, digest = _PREAMBLE.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError("not a checkpoint file")
    if version != FORMAT_VERSION:
        raise CheckpointIncompatibleError(f"format version {version}, this build reads {FORMAT_VERSION}")
    payload = data[_PREAMBLE.size :]
    if len(payload) != length:
        raise CheckpointError(f"payload holds {len(payload)} bytes, header announces {length}")
    if hashlib.sha256(payload).digest() != digest:
        raise CheckpointError("checkpoint payload is corrupted (checksum mismatch)")

    (header_length,) = struct.unpack_from("<Q", payload)
    header = json.loads(payload[8 : 8 + header_length].decode("utf-8"))
    body = payload[8 + header_length :]
    arrays: Dict[str, np.ndarray] = {}
    for entry in header["arrays"]:
        count = int(np.prod(entry["shape"], dtype=np.int64))
        if count == 0:
            arrays[entry["name"]] = np.zeros(entry["shape"])
            continue
        raw = np.frombuffer(body, dtype="<f8", count=count, offset=entry["offset"])
        arrays[entry["name"]] = raw.astype(np.float64).reshape(entry["shape"])
    return arrays, header["metadata"]


def checkpoint_save(path: str, arrays: Dict[str, np.ndarray], metadata: Dict[str, Any]) -> str:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "wb") as f:
        f.write(encode_checkpoint(arrays, metadata))
    logger.info(f"Checkpoint with {len(arrays)} arrays written to {path}")
    return path


def checkpoint_load(path: str) -> Tuple[Dict[str, np.ndarray], Dict[str, Any]]:
    if not os.path.isfile(path):
        raise CheckpointError(f"'{path}' does not exist")
    with open(path, "rb") as f:
        return decode_checkpoint(f.read())
