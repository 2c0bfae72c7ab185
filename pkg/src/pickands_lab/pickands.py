"""
Monte Carlo estimators of H(T), H of a rectangle and the Pickands constant,
with the exact oracles available for alpha = 1 and alpha = 2 and the
analytic lower bound.

Grid maxima under-estimate continuous suprema, so every grid-based
estimate here is biased low. The bias is reported (grid_step), not
corrected.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from scipy.integrate import quad
from scipy.special import log_ndtr

from .exceptions import ConfigError, NumericalError
from .gauss import gamma_fn, std_normal_cdf
from .process import iter_pickands_blocks, make_grid
from .rng import RngStream
from .scheduler import ChunkScheduler
from .utils import compensated_mean, require_alpha, require_finite, require_positive

SQRT_PI = math.sqrt(math.pi)

# Largest single sample above this share of the sample sum marks a heavy tail.
HEAVY_TAIL_SHARE = 0.01


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo mean with its standard error and discretization metadata."""

    mean: float
    stderr: float
    n_samples: int
    grid_step: float
    quantile_999: Optional[float] = None
    flags: Tuple[str, ...] = ()

    @classmethod
    def from_samples(cls, samples: np.ndarray, grid_step: float, flags: Sequence[str] = ()) -> "Estimate":
        """
        Summarize i.i.d. samples.

        Args:
            samples: Sample values in a fixed (chunk) order
            grid_step: Step of the grid the samples were taken on
            flags: Flags to carry over

        Returns:
            Estimate with stderr = sample sd / sqrt(n)
        """
        samples = np.asarray(samples, dtype=float)
        n = samples.shape[0]
        if n < 1:
            raise ConfigError("cannot summarize an empty sample")
        if not np.all(np.isfinite(samples)):
            raise NumericalError("non-finite Monte Carlo samples (overflow of exp(sup)?)")
        mean = compensated_mean(samples, n)
        if n > 1:
            variance = math.fsum((samples - mean) ** 2) / (n - 1)
            stderr = math.sqrt(variance / n)
        else:
            stderr = 0.0

        flags = list(flags)
        total = math.fsum(samples)
        if n >= 100 and total > 0 and samples.max() > HEAVY_TAIL_SHARE * total:
            flags.append("heavy_tail")
        return cls(
            mean=mean,
            stderr=stderr,
            n_samples=n,
            grid_step=grid_step,
            quantile_999=float(np.quantile(samples, 0.999)),
            flags=tuple(flags),
        )

    @classmethod
    def from_hits(cls, hits: int, n: int, grid_step: float, flags: Sequence[str] = ()) -> "Estimate":
        """Binomial proportion estimate; flags `unreliable` below 10 hits."""
        p = hits / n
        flags = list(flags)
        if hits < 10:
            flags.append("unreliable")
        return cls(
            mean=p,
            stderr=math.sqrt(p * (1.0 - p) / n),
            n_samples=n,
            grid_step=grid_step,
            flags=tuple(flags),
        )

    @property
    def reliable(self) -> bool:
        return "unreliable" not in self.flags

    def scaled(self, factor: float) -> "Estimate":
        """Same estimate multiplied by a positive constant."""
        return Estimate(
            mean=self.mean * factor,
            stderr=self.stderr * factor,
            n_samples=self.n_samples,
            grid_step=self.grid_step,
            quantile_999=None if self.quantile_999 is None else self.quantile_999 * factor,
            flags=self.flags,
        )

    def to_dict(self) -> Dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "n_samples": self.n_samples,
            "grid_step": self.grid_step,
            "quantile_999": self.quantile_999,
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class ConvergenceRow:
    T: float
    estimate: Estimate
    ratio: float


@dataclass
class ConvergenceTable:
    """H(T)/T for increasing T; the last row's ratio is the reported constant."""

    alpha: float
    rows: List[ConvergenceRow] = field(default_factory=list)

    @property
    def pickands_constant(self) -> float:
        return self.rows[-1].ratio

    @property
    def flags(self) -> Tuple[str, ...]:
        seen: List[str] = []
        for row in self.rows:
            seen.extend(f for f in row.estimate.flags if f not in seen)
        return tuple(seen)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "T": [row.T for row in self.rows],
                "mean": [row.estimate.mean for row in self.rows],
                "stderr": [row.estimate.stderr for row in self.rows],
                "ratio": [row.ratio for row in self.rows],
            }
        )

    def to_dict(self) -> Dict:
        return {
            "alpha": self.alpha,
            "pickands_constant": self.pickands_constant,
            "flags": list(self.flags),
            "rows": [
                {"T": row.T, "ratio": row.ratio, "estimate": row.estimate.to_dict()}
                for row in self.rows
            ],
        }


def alpha2_sup(z: np.ndarray, T: float) -> np.ndarray:
    """
    sup over [0, T] of sqrt(2) t z - t^2, in closed form.

    The parabola peaks at t* = z/sqrt(2); clipping t* to [0, T] gives
    z^2/2 inside, sqrt(2) T z - T^2 beyond T and 0 for z <= 0.
    """
    z = np.asarray(z, dtype=float)
    vertex = np.clip(z / math.sqrt(2.0), 0.0, T)
    return math.sqrt(2.0) * vertex * z - vertex ** 2


def h_exact_alpha2(T: float) -> float:
    """H(T) = 1 + T/sqrt(pi) for alpha = 2."""
    require_finite("T", T)
    if T < 0:
        raise ConfigError(f"T must be non-negative, got {T}")
    return 1.0 + T / SQRT_PI


def h_quadrature_alpha1(T: float) -> float:
    """
    H(T) for alpha = 1 by adaptive quadrature.

    chi is sqrt(2) W(t) - t, whose running maximum M_T has
    P(M_T >= x) = Psi((x+T)/sqrt(2T)) + e^{-x} Phi((T-x)/sqrt(2T)),
    and H(T) = E e^{M_T} = 1 + int_0^inf e^x P(M_T >= x) dx.

    Args:
        T: Positive horizon

    Returns:
        float: H(T)

    Raises:
        NumericalError: the quadrature did not converge
    """
    require_positive("T", T)
    scale = math.sqrt(2.0 * T)

    def integrand(x: float) -> float:
        # e^x Psi(y) through log Psi, so large T does not overflow exp(x).
        return math.exp(x + float(log_ndtr(-(x + T) / scale))) + std_normal_cdf((T - x) / scale)

    # The integrand decays like a Gaussian in x beyond 3T; split where its mass sits.
    edges = (0.0, T, 3.0 * T, 3.0 * T + 5.0 * scale + 5.0, 3.0 * T + 40.0 * scale + 40.0)
    total = 1.0
    for a, b in zip(edges, edges[1:]):
        value, error = quad(integrand, a, b, limit=200, epsabs=1e-12, epsrel=1e-10)
        if not math.isfinite(value) or error > 1e-7 * max(abs(value), 1.0):
            raise NumericalError(f"quadrature for H({T}) did not converge on [{a}, {b}]: error {error:.2e}")
        total += value
    return total


def _sup_samples(alpha: float, T: float, step: float, count: int, rng: RngStream) -> np.ndarray:
    """Grid suprema of chi over [0, T] for `count` paths (closed form for alpha = 2)."""
    if alpha == 2.0:
        return alpha2_sup(rng.standard_normal(count), T)
    grid = make_grid(T, step)
    return np.concatenate([block.max(axis=1) for block in iter_pickands_blocks(alpha, grid, rng, count)])


def _check_horizon(name: str, T: float, step: float) -> None:
    require_finite(name, T)
    require_positive("step", step)
    if T < 0:
        raise ConfigError(f"{name} must be non-negative, got {T}")
    if 0 < T < step:
        raise ConfigError(f"step={step} exceeds {name}={T}")


def estimate_H_interval(
    alpha: float,
    T: float,
    step: float,
    n: int,
    rng: RngStream,
    scheduler: Optional[ChunkScheduler] = None,
) -> Estimate:
    """
    Monte Carlo estimate of H(T) = E exp(sup_{[0,T]} chi).

    Args:
        alpha: Index in (0, 2]
        T: Horizon; T = 0 is the degenerate single-point grid
        step: Maximal grid step
        n: Number of paths
        rng: Parent stream
        scheduler: Chunk runner (defaults from config)

    Returns:
        Estimate of H(T)
    """
    require_alpha(alpha)
    _check_horizon("T", T, step)
    scheduler = scheduler or ChunkScheduler()
    grid_step = make_grid(T, step).step
    flags = ("analytic_sup",) if alpha == 2.0 else ()

    def job(index: int, count: int, chunk_rng: RngStream) -> np.ndarray:
        return np.exp(_sup_samples(alpha, T, step, count, chunk_rng))

    samples = np.concatenate(scheduler.run(job, n, rng))
    estimate = Estimate.from_samples(samples, grid_step, flags)
    logger.info(f"H({T}) for alpha={alpha}: {estimate.mean:.6f} +/- {estimate.stderr:.6f} (n={n}, step={grid_step:.3g})")
    return estimate


def estimate_H_rect(
    alpha: float,
    T1: float,
    T2: float,
    steps: Tuple[float, float],
    n: int,
    rng: RngStream,
    scheduler: Optional[ChunkScheduler] = None,
) -> Estimate:
    """
    Monte Carlo estimate of H([0,T1] x [0,T2]) = E exp(sup chi(t1, t2)).

    The field is chi1(t1) + chi2(t2) with independent components, so its
    maximum over the product grid is the sum of the two grid maxima.

    Args:
        alpha: Index in (0, 2]
        T1: First side
        T2: Second side
        steps: Grid steps (step1, step2)
        n: Number of fields
        rng: Parent stream
        scheduler: Chunk runner

    Returns:
        Estimate of H of the rectangle
    """
    require_alpha(alpha)
    step1, step2 = steps
    _check_horizon("T1", T1, step1)
    _check_horizon("T2", T2, step2)
    scheduler = scheduler or ChunkScheduler()
    flags = ("analytic_sup",) if alpha == 2.0 else ()

    def job(index: int, count: int, chunk_rng: RngStream) -> np.ndarray:
        first = _sup_samples(alpha, T1, step1, count, chunk_rng)
        second = _sup_samples(alpha, T2, step2, count, chunk_rng)
        return np.exp(first + second)

    samples = np.concatenate(scheduler.run(job, n, rng))
    grid_step = max(make_grid(T1, step1).step, make_grid(T2, step2).step)
    estimate = Estimate.from_samples(samples, grid_step, flags)
    logger.info(f"H([0,{T1}]x[0,{T2}]) for alpha={alpha}: {estimate.mean:.6f} +/- {estimate.stderr:.6f}")
    return estimate


def estimate_pickands_constant(
    alpha: float,
    T_list: Sequence[float],
    step: float,
    n: int,
    rng: RngStream,
    scheduler: Optional[ChunkScheduler] = None,
) -> ConvergenceTable:
    """
    Tabulate H(T)/T over increasing T.

    The reported constant is the largest-T ratio; no convergence model is
    fitted. Row i draws from rng.child(i).

    Args:
        alpha: Index in (0, 2]
        T_list: Strictly increasing positive horizons
        step: Maximal grid step
        n: Paths per row
        rng: Parent stream
        scheduler: Chunk runner

    Returns:
        ConvergenceTable
    """
    require_alpha(alpha)
    if not T_list:
        raise ConfigError("T_list must not be empty")
    if any(b <= a for a, b in zip(T_list, T_list[1:])):
        raise ConfigError(f"T_list must be strictly increasing, got {list(T_list)}")
    if T_list[0] <= 0:
        raise ConfigError(f"T_list must be positive, got {list(T_list)}")

    table = ConvergenceTable(alpha=alpha)
    for i, T in enumerate(T_list):
        estimate = estimate_H_interval(alpha, T, step, n, rng.child(i), scheduler)
        table.rows.append(ConvergenceRow(T=float(T), estimate=estimate, ratio=estimate.mean / T))
        if "heavy_tail" in estimate.flags:
            logger.warning(f"H({T}) estimate is dominated by a few samples; H(T)/T is biased low at this T")
    return table


def pickands_lower_bound(alpha: float) -> float:
    """H_alpha >= alpha / (2^(2 + 2/alpha) Gamma(1/alpha))."""
    require_alpha(alpha)
    return alpha / (2.0 ** (2.0 + 2.0 / alpha) * gamma_fn(1.0 / alpha))


def ceiling_bound_1d(T: float, H1: Estimate) -> float:
    """H(T) <= ceil(T) H([0,1])."""
    require_positive("T", T)
    return math.ceil(T) * H1.mean


def ceiling_bound_2d(a: float, b: float, c: float, d: float, Hsq: Estimate) -> float:
    """H([a,b] x [c,d]) <= ceil(b-a) ceil(d-c) H([0,1]^2)."""
    for name, value in (("a", a), ("b", b), ("c", c), ("d", d)):
        require_finite(name, value)
    if b <= a or d <= c:
        raise ConfigError(f"[{a},{b}]x[{c},{d}] is not a rectangle")
    return math.ceil(b - a) * math.ceil(d - c) * Hsq.mean
