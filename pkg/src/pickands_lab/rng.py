"""
Deterministic random streams.

A stream is identified by (seed, stream_id) plus an optional path of child
indices. The identity is hashed by numpy's SeedSequence into a 128-bit
Philox key, so any stream can be constructed in O(1) without advancing a
parent generator, and distinct identities give independent sequences.
"""

from typing import Optional, Tuple

import numpy as np

from .exceptions import ConfigError

_UINT64_MAX = 2 ** 64 - 1


class RngStream:
    """Counter-based random source owned by a single worker."""

    def __init__(self, seed: int, stream_id: int = 0, path: Tuple[int, ...] = ()):
        for name, value in (("seed", seed), ("stream_id", stream_id)):
            if not 0 <= int(value) <= _UINT64_MAX:
                raise ConfigError(f"{name} must be a 64-bit unsigned integer, got {value}")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.path = tuple(int(p) for p in path)
        self._generator: Optional[np.random.Generator] = None

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, path={self.path})"

    @property
    def generator(self) -> np.random.Generator:
        """Lazily built numpy Generator on a Philox bit generator."""
        if self._generator is None:
            sequence = np.random.SeedSequence(
                entropy=self.seed, spawn_key=(self.stream_id,) + self.path
            )
            key = sequence.generate_state(2, dtype=np.uint64)
            self._generator = np.random.Generator(np.random.Philox(key=key))
        return self._generator

    def child(self, index: int) -> "RngStream":
        """Independent sub-stream, e.g. one per replication chunk."""
        if index < 0:
            raise ConfigError(f"child index must be non-negative, got {index}")
        return RngStream(self.seed, self.stream_id, self.path + (index,))

    def standard_normal(self, size=None) -> np.ndarray:
        return self.generator.standard_normal(size)

    def uniform(self, size=None) -> np.ndarray:
        return self.generator.random(size)
