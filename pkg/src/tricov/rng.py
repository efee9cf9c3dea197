"""Reproducible random substreams.

A stream is addressed by a master seed and a path of integers, e.g.
``(replication, PROCESS, curve)``. The path is folded into a 128-bit Philox
key with the splitmix64 finaliser (constants 0x9E3779B97F4A7C15,
0xBF58476D1CE4E5B9, 0x94D049BB133111EB), so every address maps to its own
counter-based stream independent of platform and scheduling order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RngSpec", "splitmix64", "PROCESS", "NOISE", "FOLDS", "REPLICATION"]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_SALT = 0xD1B54A32D192ED03

# stream tags
PROCESS = 1
NOISE = 2
FOLDS = 3
REPLICATION = 4


def splitmix64(z: int) -> int:
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RngSpec:
    seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "seed", int(self.seed) & _MASK)
        object.__setattr__(self, "path", tuple(int(i) for i in self.path))

    def child(self, *index: int) -> RngSpec:
        return RngSpec(self.seed, self.path + tuple(index))

    def key(self) -> tuple[int, int]:
        state = splitmix64(self.seed)
        for i in self.path:
            state = splitmix64(state ^ splitmix64((i & _MASK) ^ _SALT))
        return state, splitmix64(state ^ _SALT)

    def generator(self) -> np.random.Generator:
        k0, k1 = self.key()
        return np.random.Generator(np.random.Philox(key=np.array([k0, k1], dtype=np.uint64)))

    def curve_normals(self, tag: int, n: int, size: int) -> np.ndarray:
        """``(n, size)`` standard normals, row ``i`` drawn from substream ``(tag, i)``."""
        out = np.empty((n, size))
        for i in range(n):
            out[i] = self.child(tag, i).generator().standard_normal(size)
        return out
