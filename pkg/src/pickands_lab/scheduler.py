"""
Deterministic chunked replication.

Monte Carlo work of n replications is cut into chunks of `chunk_size`.
Chunk i always draws from rng.child(i), and chunk results are returned in
chunk order, so outputs depend on (seed, n, chunk_size) only and never on
the number of workers.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple, TypeVar

from loguru import logger

from .config import config
from .exceptions import ConfigError
from .rng import RngStream

T = TypeVar("T")

ChunkJob = Callable[[int, int, RngStream], T]


class ChunkScheduler:
    """Runs replication chunks across a worker pool."""

    def __init__(self, workers: Optional[int] = None, chunk_size: Optional[int] = None):
        """Initialize the scheduler from explicit values or the global config."""
        self.workers = int(workers if workers is not None else config.WORKERS)
        self.chunk_size = int(chunk_size if chunk_size is not None else config.CHUNK_SIZE)
        if self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}")
        if self.chunk_size < 1:
            raise ConfigError(f"chunk_size must be positive, got {self.chunk_size}")

    def plan(self, n: int) -> List[Tuple[int, int]]:
        """(chunk index, replications) pairs covering n replications."""
        if n < 1:
            raise ConfigError(f"n must be a positive integer, got {n}")
        chunks = []
        done = 0
        index = 0
        while done < n:
            count = min(self.chunk_size, n - done)
            chunks.append((index, count))
            done += count
            index += 1
        return chunks

    def run(self, job: ChunkJob, n: int, rng: RngStream) -> List[T]:
        """
        Execute `job(index, count, chunk_rng)` for every chunk.

        Args:
            job: Chunk worker; must only touch its own stream
            n: Total replications
            rng: Parent stream; chunk i uses rng.child(i)

        Returns:
            List of chunk results in chunk order
        """
        chunks = self.plan(n)
        logger.debug(f"Running {n} replications as {len(chunks)} chunks on {self.workers} worker(s)")

        def call(chunk: Tuple[int, int]) -> T:
            index, count = chunk
            return job(index, count, rng.child(index))

        if self.workers == 1 or len(chunks) == 1:
            return [call(chunk) for chunk in chunks]

        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            return list(executor.map(call, chunks))
