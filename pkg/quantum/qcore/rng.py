"""
qcore/rng.py

Behavior:
    - One reproducible random stream per trajectory, keyed by (seed, stream_id).
    - Streams are derived with numpy SeedSequence spawn keys, so streams with
      different ids are statistically independent and never share state.
"""
from __future__ import annotations

from typing import List

import numpy as np

from .errors import InvalidInputError

SEED_MASK = (1 << 64) - 1


class RngStream:
    """
    :param seed: 64-bit run seed
    :param stream_id: trajectory index (or any non-negative key)
    """

    def __init__(self, seed: int, stream_id: int = 0, _path: tuple = ()):
        if stream_id < 0:
            raise InvalidInputError(f"stream_id must be non-negative, got {stream_id}")
        self.seed = int(seed) & SEED_MASK
        self.stream_id = int(stream_id)
        self._path = tuple(_path)
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,) + self._path)
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, path={self._path})"

    def uniform(self) -> float:
        return float(self.generator.random())

    def uniforms(self, n: int) -> np.ndarray:
        return self.generator.random(n)

    def child(self, key: int) -> "RngStream":
        """Independent sub-stream, e.g. for a second random ingredient of the same path."""
        return RngStream(self.seed, self.stream_id, self._path + (int(key),))

    @staticmethod
    def family(seed: int, count: int, offset: int = 0) -> List["RngStream"]:
        return [RngStream(seed, offset + k) for k in range(count)]
