from typing import Dict

import numpy as np

from marl_avoidance.utils import stable_name_key

STREAM_NAMES = ("env", "exploration", "sampling", "init", "eval")


def substream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for one consumer; adding or removing a consumer never shifts another."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stable_name_key(name),)))


class SeedStreams:
    def __init__(self, seed: int):
        self.seed = seed
        self._streams: Dict[str, np.random.Generator] = {}

    def __getitem__(self, name: str) -> np.random.Generator:
        if name not in self._streams:
            self._streams[name] = substream(self.seed, name)
        return self._streams[name]

    def fresh(self, name: str) -> np.random.Generator:
        """A generator restarted from the beginning of the named stream."""
        return substream(self.seed, name)
