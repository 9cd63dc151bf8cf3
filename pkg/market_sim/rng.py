import logging
from typing import Dict

import numpy as np

# Order is part of the seeding contract; append new streams at the end only.
STREAM_NAMES = (
    "init",
    "noise",
    "selection",
    "fundamental_k",
    "fundamental_coin",
    "matching",
)


class RandomSource:
    """Named, order-isolated random substreams derived from one master seed.

    Each stream is its own PCG64 generator seeded from a child of the master
    SeedSequence, so drawing from one never shifts another.
    """

    def __init__(self, master_seed: int):
        if not 0 <= int(master_seed) < 2**64:
            raise ValueError(f"master seed must fit in 64 bits, got {master_seed}")
        self.master_seed = int(master_seed)
        self.logger = logging.getLogger(__name__)
        self._streams: Dict[str, np.random.Generator] = {}
        for index, name in enumerate(STREAM_NAMES):
            seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(index,))
            self._streams[name] = np.random.Generator(np.random.PCG64(seq))

    def stream(self, name: str) -> np.random.Generator:
        try:
            return self._streams[name]
        except KeyError:
            raise KeyError(f"unknown random stream '{name}', expected one of {STREAM_NAMES}") from None

    @property
    def init(self) -> np.random.Generator:
        return self._streams["init"]

    @property
    def noise(self) -> np.random.Generator:
        return self._streams["noise"]

    @property
    def selection(self) -> np.random.Generator:
        return self._streams["selection"]

    @property
    def fundamental_k(self) -> np.random.Generator:
        return self._streams["fundamental_k"]

    @property
    def fundamental_coin(self) -> np.random.Generator:
        return self._streams["fundamental_coin"]

    @property
    def matching(self) -> np.random.Generator:
        return self._streams["matching"]
