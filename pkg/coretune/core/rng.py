"""
Seeded random streams.

Every consumer draws from its own stream so that adding a consumer never shifts
another one. Streams use numpy's Philox bit generator, a 64-bit counter-based
generator, keyed by ``SeedSequence(seed, spawn_key=(purpose,))``.
"""
from enum import IntEnum
from typing import Dict, Sequence, Union

import numpy as np


class Purpose(IntEnum):
    """Named stream purposes; values are the spawn keys and must never be reused"""
    DATA = 1
    SPLIT = 2
    INIT = 3
    SHUFFLE = 4
    BETA = 5
    PAIRING = 6
    GRADCHECK = 7


def make_generator(seed: Union[int, Sequence[int]], purpose: Purpose) -> np.random.Generator:
    """A fresh generator for one purpose"""
    entropy = list(seed) if isinstance(seed, (list, tuple)) else int(seed)
    seq = np.random.SeedSequence(entropy, spawn_key=(int(purpose),))
    return np.random.Generator(np.random.Philox(seq))


class RngStreams:
    """Lazily created per-purpose generators for one run seed"""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._streams: Dict[Purpose, np.random.Generator] = {}

    def stream(self, purpose: Purpose) -> np.random.Generator:
        if purpose not in self._streams:
            self._streams[purpose] = make_generator(self.seed, purpose)
        return self._streams[purpose]
