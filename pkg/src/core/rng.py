"""
Keyed random substreams.

A master 64-bit seed is split into independent streams addressed by an
operation tag and integer keys (step index, element, sample block). The
same address always yields the same stream, so results do not depend on
the order in which streams are consumed or on the number of workers.
"""

import zlib
from typing import Tuple

import numpy as np

SEED_MASK = (1 << 64) - 1


def tag_key(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


class KeyedStreams:
    def __init__(self, seed: int):
        self.seed = int(seed) & SEED_MASK

    def _sequence(self, tag: str, keys: Tuple[int, ...]) -> np.random.SeedSequence:
        spawn_key = (tag_key(tag),) + tuple(int(k) for k in keys)
        return np.random.SeedSequence(entropy=self.seed, spawn_key=spawn_key)

    def generator(self, tag: str, *keys: int) -> np.random.Generator:
        """Return the generator addressed by (tag, keys)."""
        return np.random.Generator(np.random.PCG64(self._sequence(tag, keys)))

    def child_seed(self, tag: str, *keys: int) -> int:
        """Derive a 64-bit seed for a sub-computation with its own streams."""
        state = self._sequence(tag, keys).generate_state(2, dtype=np.uint32)
        return (int(state[0]) << 32) | int(state[1])
