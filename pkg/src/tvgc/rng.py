"""Counter-based random streams.

Every random draw in the package comes from a Philox4x64-10 generator
(round multipliers 0xD2E7470EE14C6C93 and 0xCA5A826395121157, Weyl key
increments 0x9E3779B97F4A7C15 and 0xBB67AE8584CAA73B). A stream is addressed
by ``(seed, *path)``: the 128-bit key is ``[seed mod 2**64, fold(path)]``
where ``fold`` chains SplitMix64 over the path components, and the counter
starts at zero. Streams for different paths are independent, so work can be
scheduled in any order without changing results.
"""

import zlib

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _component(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part) & _MASK


def fold(path) -> int:
    h = 0
    for part in path:
        h = splitmix64(h ^ _component(part))
    return h


def stream(seed: int, *path) -> np.random.Generator:
    """Return the generator for ``(seed, *path)``."""
    key = np.array([int(seed) & _MASK, fold(path)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
