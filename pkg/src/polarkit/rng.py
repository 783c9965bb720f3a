"""Counter-based random streams.

Every draw is addressed by ``(seed, trial, stream)``: the Philox key is
``(seed, trial)`` and the stream id occupies the top word of the 256-bit
counter, so streams never overlap and any trial can be regenerated on its own,
in any order, by any worker.
"""

from __future__ import annotations

import numpy as np

MESSAGE = 0
CHANNEL = 1
FROZEN = 2

_MASK64 = (1 << 64) - 1


def stream(seed: int, trial: int, which: int) -> np.random.Generator:
    if not 0 <= seed <= _MASK64:
        raise ValueError("seed must fit in 64 unsigned bits")
    key = np.array([seed, trial & _MASK64], dtype=np.uint64)
    counter = np.array([0, 0, 0, which], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def bits(seed: int, trial: int, which: int, count: int) -> np.ndarray:
    return stream(seed, trial, which).integers(0, 2, size=count, dtype=np.uint8)


def uniforms(seed: int, trial: int, which: int, count: int) -> np.ndarray:
    return stream(seed, trial, which).random(count)
