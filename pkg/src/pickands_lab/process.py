"""
Samplers for fractional Brownian motion, the Pickands drift process and
stationary Gaussian processes with r(t) = 1 - |t|^alpha + o(|t|^alpha).

The fBm here is normalized so that E B(1)^2 = 2, i.e.
Cov(B(t), B(s)) = |t|^alpha + |s|^alpha - |t-s|^alpha (Hurst index alpha/2).
"""

import math
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Optional

import numpy as np
import pandas as pd
from loguru import logger
from scipy.linalg import toeplitz
from scipy.signal import lfilter

from .exceptions import ConfigError, NumericalError
from .gauss import cholesky_sample_batch
from .rng import RngStream
from .utils import require_alpha, require_finite, require_positive

# Relative tolerance on negative circulant eigenvalues.
EMBEDDING_TOLERANCE = 1e-8

# Upper bound on array elements generated per block of paths.
_BLOCK_ELEMENTS = 2 ** 20
# Chunk workers share one plan per model and grid.
_PLAN_LOCK = threading.Lock()


class EmbeddingFailure(Exception):
    """Circulant embedding has a negative eigenvalue beyond tolerance."""


@dataclass(frozen=True)
class Grid:
    """Uniform time grid start + k*step, k = 0..count-1."""

    start: float
    step: float
    count: int

    def __post_init__(self):
        require_finite("start", self.start)
        require_positive("step", self.step)
        if int(self.count) != self.count or self.count < 1:
            raise ConfigError(f"count must be a positive integer, got {self.count}")

    @property
    def span(self) -> float:
        return self.step * (self.count - 1)

    @property
    def points(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count)


def make_grid(span: float, step: float, start: float = 0.0) -> Grid:
    """
    Grid on [start, start + span] whose last point is exactly the endpoint.

    The step is shrunk, never grown, so that step * (count - 1) == span.

    Args:
        span: Length of the interval (0 gives the single point {start})
        step: Requested maximal step

    Returns:
        Grid
    """
    require_finite("span", span)
    require_positive("step", step)
    if span < 0:
        raise ConfigError(f"span must be non-negative, got {span}")
    if span == 0:
        return Grid(start, step, 1)
    intervals = max(1, math.ceil(span / step - 1e-9))
    return Grid(start, span / intervals, intervals + 1)


@dataclass(frozen=True)
class Path:
    """A sampled trajectory on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid.count,):
            raise ConfigError(f"path has {self.values.shape} values for a grid of {self.grid.count}")
        if not np.all(np.isfinite(self.values)):
            raise NumericalError("path has non-finite values")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.grid.points, "value": self.values})


@dataclass(frozen=True)
class Field2D:
    """A sampled random field on a product grid."""

    grid1: Grid
    grid2: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid1.count, self.grid2.count):
            raise ConfigError(
                f"field has shape {self.values.shape}, grids need ({self.grid1.count}, {self.grid2.count})"
            )
        if not np.all(np.isfinite(self.values)):
            raise NumericalError("field has non-finite values")


class CovarianceModel(ABC):
    """
    Stationary covariance r(t) with r(0) = 1.

    Subclasses must be hashable (frozen dataclasses are); samplers cache
    their embedding per model and grid.
    """

    alpha: float

    @abstractmethod
    def covariance(self, lags: np.ndarray) -> np.ndarray:
        """r at the given lags."""

    def local_condition_epsilon(self, resolution: float = 1e-4) -> float:
        """
        Largest epsilon with 1 - 2|t|^a <= r(t) <= 1 - |t|^a / 2 on [0, epsilon].

        Also enforces epsilon < 1/2 and epsilon^alpha < 1/2, the side
        conditions of the joint-exceedance estimate. Returns 0 if the
        sandwich fails immediately.
        """
        cap = min(0.5, 0.5 ** (1.0 / self.alpha)) - resolution
        lags = np.arange(1, int(cap / resolution) + 1) * resolution
        r = self.covariance(lags)
        powered = lags ** self.alpha
        ok = (1.0 - 2.0 * powered <= r) & (r <= 1.0 - 0.5 * powered)
        if ok.all():
            return float(lags[-1])
        first_bad = int(np.argmin(ok))
        return float(lags[first_bad - 1]) if first_bad > 0 else 0.0


@dataclass(frozen=True)
class ExpAlpha(CovarianceModel):
    """r(t) = exp(-|t|^alpha); alpha = 1 is the Ornstein-Uhlenbeck process."""

    alpha: float

    def __post_init__(self):
        require_alpha(self.alpha)

    def covariance(self, lags: np.ndarray) -> np.ndarray:
        return np.exp(-np.abs(np.asarray(lags, dtype=float)) ** self.alpha)


def _next_power_of_two(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def _block_sizes(size: int, row_elements: int) -> Iterator[int]:
    rows = max(1, _BLOCK_ELEMENTS // max(row_elements, 1))
    done = 0
    while done < size:
        block = min(rows, size - done)
        yield block
        done += block


def _circulant_eigenvalues(acf: Callable[[np.ndarray], np.ndarray], length: int) -> np.ndarray:
    """Eigenvalues of the minimal power-of-two circulant embedding of a stationary sequence."""
    size = _next_power_of_two(2 * (length - 1))
    lags = np.arange(size)
    row = acf(np.minimum(lags, size - lags).astype(float))
    eigenvalues = np.fft.fft(row).real
    floor = -EMBEDDING_TOLERANCE * eigenvalues.max()
    if eigenvalues.min() < floor:
        raise EmbeddingFailure(
            f"negative circulant eigenvalue {eigenvalues.min():.3e} (tolerance {floor:.3e}, size {size})"
        )
    return np.clip(eigenvalues, 0.0, None)


def _circulant_blocks(eigenvalues: np.ndarray, length: int, rng: RngStream, size: int) -> Iterator[np.ndarray]:
    """Davies-Harte draws: real part of FFT(sqrt(lambda/M) * complex normal)."""
    embed = eigenvalues.shape[0]
    scale = np.sqrt(eigenvalues / embed)
    for block in _block_sizes(size, embed):
        real = rng.standard_normal((block, embed))
        imag = rng.standard_normal((block, embed))
        yield np.fft.fft(scale * (real + 1j * imag), axis=1).real[:, :length]


@dataclass(frozen=True)
class _SequencePlan:
    """Embedding eigenvalues, or the Toeplitz covariance when the embedding failed."""

    eigenvalues: Optional[np.ndarray] = None
    covariance: Optional[np.ndarray] = None


def _sequence_plan(acf: Callable[[np.ndarray], np.ndarray], length: int, what: str) -> _SequencePlan:
    try:
        return _SequencePlan(eigenvalues=_circulant_eigenvalues(acf, length))
    except EmbeddingFailure as e:
        logger.warning(f"{what}: {e}; falling back to Cholesky sampling")
        return _SequencePlan(covariance=toeplitz(acf(np.arange(length, dtype=float))))


@lru_cache(maxsize=32)
def _fbm_noise_plan(alpha: float, step: float, steps: int) -> _SequencePlan:
    h_alpha = step ** alpha

    def noise_acf(k: np.ndarray) -> np.ndarray:
        return h_alpha * (np.abs(k + 1) ** alpha + np.abs(k - 1) ** alpha - 2.0 * np.abs(k) ** alpha)

    return _sequence_plan(noise_acf, steps, f"fBm(alpha={alpha})")


@lru_cache(maxsize=32)
def _stationary_plan(model: "CovarianceModel", step: float, count: int) -> _SequencePlan:
    def acf(k: np.ndarray) -> np.ndarray:
        return model.covariance(k * step)

    return _sequence_plan(acf, count, f"{model}")


def clear_sampling_plans() -> None:
    """Forget cached embeddings; the next sampler call re-derives (and re-logs) them."""
    _fbm_noise_plan.cache_clear()
    _stationary_plan.cache_clear()


def _plan_blocks(plan: _SequencePlan, length: int, rng: RngStream, size: int, what: str) -> Iterator[np.ndarray]:
    if plan.eigenvalues is not None:
        yield from _circulant_blocks(plan.eigenvalues, length, rng, size)
        return
    try:
        for block in _block_sizes(size, length):
            yield cholesky_sample_batch(np.zeros(length), plan.covariance, rng, block)
    except NumericalError as fallback_error:
        raise NumericalError(f"{what}: embedding and Cholesky fallback both failed: {fallback_error}")


def _stationary_sequence_blocks(
    acf: Callable[[np.ndarray], np.ndarray], length: int, rng: RngStream, size: int, what: str
) -> Iterator[np.ndarray]:
    """Stationary Gaussian sequences with autocovariance acf(k), embedding first, Cholesky fallback."""
    yield from _plan_blocks(_sequence_plan(acf, length, what), length, rng, size, what)


def _require_origin(grid: Grid) -> None:
    if grid.start != 0:
        raise ConfigError(f"grid must start at 0, got start={grid.start}")


def iter_fbm_blocks(alpha: float, grid: Grid, rng: RngStream, size: int) -> Iterator[np.ndarray]:
    """
    Fractional Brownian motion paths, generated in memory-bounded blocks.

    Yields:
        np.ndarray blocks of shape (rows, grid.count); rows sum to `size`
    """
    require_alpha(alpha)
    _require_origin(grid)
    if size < 1:
        raise ConfigError(f"size must be positive, got {size}")
    times = grid.points

    if grid.count == 1:
        for block in _block_sizes(size, 1):
            yield np.zeros((block, 1))
        return

    if alpha == 2.0:
        # Rank-one increments: B(t) = sqrt(2) t Z.
        for block in _block_sizes(size, grid.count):
            z = rng.standard_normal(block)
            yield math.sqrt(2.0) * z[:, None] * times[None, :]
        return

    steps = grid.count - 1
    if alpha == 1.0:
        # Brownian case: independent increments of variance 2h.
        def increments() -> Iterator[np.ndarray]:
            for block in _block_sizes(size, steps):
                yield math.sqrt(2.0 * grid.step) * rng.standard_normal((block, steps))
    else:
        with _PLAN_LOCK:
            plan = _fbm_noise_plan(alpha, grid.step, steps)

        def increments() -> Iterator[np.ndarray]:
            yield from _plan_blocks(plan, steps, rng, size, f"fBm(alpha={alpha})")

    for block in increments():
        path = np.zeros((block.shape[0], grid.count))
        np.cumsum(block, axis=1, out=path[:, 1:])
        yield path


def iter_pickands_blocks(alpha: float, grid: Grid, rng: RngStream, size: int) -> Iterator[np.ndarray]:
    """Blocks of chi(t) = B(t) - t^alpha."""
    drift = grid.points ** alpha
    for block in iter_fbm_blocks(alpha, grid, rng, size):
        yield block - drift


def iter_stationary_blocks(model: CovarianceModel, grid: Grid, rng: RngStream, size: int) -> Iterator[np.ndarray]:
    """
    Mean-zero stationary paths with Cov(X(t_i), X(t_j)) = r(|t_i - t_j|).

    ExpAlpha(1) uses the exact AR(1) recursion; everything else goes
    through circulant embedding with a Cholesky fallback.
    """
    if size < 1:
        raise ConfigError(f"size must be positive, got {size}")
    if grid.count == 1:
        for block in _block_sizes(size, 1):
            yield rng.standard_normal((block, 1))
        return

    if isinstance(model, ExpAlpha) and model.alpha == 1.0:
        phi = math.exp(-grid.step)
        innovation_sd = math.sqrt(-math.expm1(-2.0 * grid.step))
        for block in _block_sizes(size, grid.count):
            shocks = rng.standard_normal((block, grid.count))
            shocks[:, 1:] *= innovation_sd
            yield lfilter([1.0], [1.0, -phi], shocks, axis=1)
        return

    with _PLAN_LOCK:
        plan = _stationary_plan(model, grid.step, grid.count)
    yield from _plan_blocks(plan, grid.count, rng, size, f"{model}")


def sample_fbm_paths(alpha: float, grid: Grid, rng: RngStream, size: int) -> np.ndarray:
    return np.concatenate(list(iter_fbm_blocks(alpha, grid, rng, size)))


def sample_pickands_paths(alpha: float, grid: Grid, rng: RngStream, size: int) -> np.ndarray:
    return np.concatenate(list(iter_pickands_blocks(alpha, grid, rng, size)))


def sample_stationary_paths(model: CovarianceModel, grid: Grid, rng: RngStream, size: int) -> np.ndarray:
    return np.concatenate(list(iter_stationary_blocks(model, grid, rng, size)))


def fbm_sample(alpha: float, grid: Grid, rng: RngStream) -> Path:
    """One fBm path with E B(1)^2 = 2 on a grid starting at 0."""
    return Path(grid, sample_fbm_paths(alpha, grid, rng, 1)[0])


def pickands_process_sample(alpha: float, grid: Grid, rng: RngStream) -> Path:
    """One path of chi(t) = B(t) - t^alpha."""
    return Path(grid, sample_pickands_paths(alpha, grid, rng, 1)[0])


def stationary_sample(model: CovarianceModel, grid: Grid, rng: RngStream) -> Path:
    """One stationary Gaussian path with covariance r."""
    return Path(grid, sample_stationary_paths(model, grid, rng, 1)[0])


def pickands_field_2d_sample(alpha: float, grid1: Grid, grid2: Grid, rng: RngStream) -> Field2D:
    """
    chi(t1, t2) = B1(t1) + B2(t2) - t1^alpha - t2^alpha with B1, B2 independent.

    Args:
        alpha: Index in (0, 2]
        grid1: Grid for t1, starting at 0
        grid2: Grid for t2, starting at 0
        rng: Random stream

    Returns:
        Field2D
    """
    chi1 = pickands_process_sample(alpha, grid1, rng).values
    chi2 = pickands_process_sample(alpha, grid2, rng).values
    return Field2D(grid1, grid2, chi1[:, None] + chi2[None, :])
