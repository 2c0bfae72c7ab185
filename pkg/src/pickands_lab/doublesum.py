"""
Exceedance probabilities of stationary Gaussian suprema and the double-sum
bracketing around them.

All bracketing counts are taken on one shared path ensemble (common random
numbers), so the orderings lower <= union <= full horizon <= block union
hold path by path and are asserted exactly on integer counts.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.integrate import dblquad

from .exceptions import ConfigError, NumericalError
from .gauss import cholesky_factor, std_normal_tail
from .pickands import Estimate
from .process import CovarianceModel, iter_stationary_blocks, make_grid
from .rng import RngStream
from .scheduler import ChunkScheduler
from .utils import require_alpha, require_finite, require_positive

Interval = Tuple[float, float]

# Fraction of the natural scale u^(-2/alpha) used as default grid step.
DEFAULT_STEP_FRACTION = 1.0 / 20.0
# Steps above this fraction of the natural scale under-resolve block maxima.
MAX_STEP_FRACTION = 0.1


def natural_scale(u: float, alpha: float) -> float:
    """u^(-2/alpha), the length scale of a Pickands block at level u."""
    require_positive("u", u)
    require_alpha(alpha)
    return u ** (-2.0 / alpha)


def default_step(u: float, alpha: float) -> float:
    """Grid step giving 20 points per unit of the natural scale."""
    return natural_scale(u, alpha) * DEFAULT_STEP_FRACTION


@dataclass(frozen=True)
class IntervalPartition:
    """Blocks Delta_k = [k L, (k+1) L], k = 0..N_p, with L = u^(-2/alpha) T."""

    p: float
    u: float
    alpha: float
    T: float
    block_length: float
    N_p: int
    blocks: Tuple[Interval, ...]

    @property
    def degenerate(self) -> bool:
        return self.N_p < 2

    def to_dict(self) -> Dict:
        return {
            "p": self.p,
            "u": self.u,
            "alpha": self.alpha,
            "T": self.T,
            "block_length": self.block_length,
            "N_p": self.N_p,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class BoundsReport:
    """
    Full-horizon exceedance with its double-sum bracket and the asymptotic value.

    Two Bonferroni lower bounds are reported. `bonferroni_lower` is the
    pathwise form over the raw blocks 0..N_p-1, equal to lower_count / n,
    so it never exceeds `mc` on the same ensemble. `bonferroni_lower_stationary`
    is N_p * single - sigma2, built from the position-averaged single and
    lag-pair frequencies; it estimates the same quantity and differs from
    the pathwise value by Monte Carlo noise only, because `single` averages
    all N_p + 1 blocks.
    """

    mc: Estimate
    bonferroni_lower: float
    union_upper: float
    pickands_value: float
    partition: IntervalPartition
    step: float
    seed: int
    full_count: int
    lower_count: int
    union_count: int
    upper_count: int
    single: float
    pair_lags: Tuple[float, ...]
    sigma2: float
    block_ratio: float
    upper_envelope: Optional[float] = None
    flags: Tuple[str, ...] = ()

    @property
    def bonferroni_lower_stationary(self) -> float:
        return self.partition.N_p * self.single - self.sigma2

    @property
    def asymptotic_ratio(self) -> float:
        """mc / (p u^(2/alpha) Psi(u)); tends to H_alpha."""
        part = self.partition
        return self.mc.mean / (part.p * part.u ** (2.0 / part.alpha) * std_normal_tail(part.u))

    def to_dict(self) -> Dict:
        part = self.partition
        return {
            "p": part.p,
            "u": part.u,
            "alpha": part.alpha,
            "T": part.T,
            "step": self.step,
            "n": self.mc.n_samples,
            "seed": self.seed,
            "mc": self.mc.to_dict(),
            "bonferroni_lower": self.bonferroni_lower,
            "bonferroni_lower_stationary": self.bonferroni_lower_stationary,
            "union_upper": self.union_upper,
            "pickands_value": self.pickands_value,
            "upper_envelope": self.upper_envelope,
            "asymptotic_ratio": self.asymptotic_ratio,
            "block_ratio": self.block_ratio,
            "partition": part.to_dict(),
            "counts": {
                "lower": self.lower_count,
                "union": self.union_count,
                "full": self.full_count,
                "upper": self.upper_count,
            },
            "single": self.single,
            "pair_lags": list(self.pair_lags),
            "sigma2": self.sigma2,
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class JointBoundReport:
    """
    Joint block exceedance against the explicit constant C(alpha, t0, T).

    `holds` is None when neither the joint nor the first-block estimate
    carries enough hits to decide. The joint event lies inside the
    first-block event on every path, so first_ratio <= C certifies the
    bound when the joint count alone is too small. `level_floor` is
    ((t0 - T) / epsilon)^(alpha/2), the level from which the constant is
    proven, with epsilon the local-condition radius of the covariance.
    """

    alpha: float
    T: float
    t0: float
    u: float
    joint: Estimate
    first: Estimate
    second: Estimate
    ratio: float
    constant: float
    holds: Optional[bool]
    first_ratio: float
    marginal_holds: Optional[bool]
    epsilon: float
    level_floor: float
    flags: Tuple[str, ...] = ()

    def to_dict(self) -> Dict:
        return {
            "alpha": self.alpha,
            "T": self.T,
            "t0": self.t0,
            "u": self.u,
            "joint": self.joint.to_dict(),
            "first": self.first.to_dict(),
            "second": self.second.to_dict(),
            "ratio": self.ratio,
            "constant": self.constant,
            "holds": self.holds,
            "first_ratio": self.first_ratio,
            "marginal_holds": self.marginal_holds,
            "epsilon": self.epsilon,
            "level_floor": self.level_floor,
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class SlepianReport:
    pX: Estimate
    pY: Estimate
    consistent: bool

    def to_dict(self) -> Dict:
        return {"pX": self.pX.to_dict(), "pY": self.pY.to_dict(), "consistent": self.consistent}


@dataclass(frozen=True)
class BorellLevel:
    w: float
    tail: Estimate
    bound: float
    dominated: bool


@dataclass
class BorellReport:
    """Empirical sup tails on one ensemble against the Borell bound."""

    m_hat: float
    sigma2: float
    levels: List[BorellLevel] = field(default_factory=list)

    @property
    def dominated(self) -> bool:
        return all(level.dominated for level in self.levels)

    def to_dict(self) -> Dict:
        return {
            "m_hat": self.m_hat,
            "sigma2": self.sigma2,
            "dominated": self.dominated,
            "levels": [
                {"w": lv.w, "tail": lv.tail.mean, "stderr": lv.tail.stderr, "bound": lv.bound, "dominated": lv.dominated}
                for lv in self.levels
            ],
        }


def _interval_mask(times: np.ndarray, interval: Interval, step: float) -> np.ndarray:
    slack = 1e-9 * step
    return (times >= interval[0] - slack) & (times <= interval[1] + slack)


def _check_step(u: float, alpha: float, step: float) -> None:
    if u > 0 and step > MAX_STEP_FRACTION * natural_scale(u, alpha):
        logger.warning(
            f"step={step} exceeds {MAX_STEP_FRACTION} * u^(-2/alpha)={natural_scale(u, alpha):.4g}; "
            f"block maxima will be biased low"
        )


def mc_sup_exceedance(
    model: CovarianceModel,
    p: float,
    u: float,
    step: float,
    n: int,
    rng: RngStream,
    scheduler: Optional[ChunkScheduler] = None,
) -> Estimate:
    """
    Fraction of paths whose grid maximum on [0, p] exceeds u.

    Args:
        model: Stationary covariance model
        p: Horizon (0 gives the single point {0})
        u: Level
        step: Maximal grid step
        n: Number of paths
        rng: Parent stream
        scheduler: Chunk runner

    Returns:
        Binomial Estimate, flagged `unreliable` below 10 hits
    """
    require_finite("u", u)
    require_finite("p", p)
    if p < 0:
        raise ConfigError(f"p must be non-negative, got {p}")
    grid = make_grid(p, step)
    _check_step(u, model.alpha, grid.step)
    scheduler = scheduler or ChunkScheduler()

    def job(index: int, count: int, chunk_rng: RngStream) -> int:
        return sum(int((block.max(axis=1) > u).sum()) for block in iter_stationary_blocks(model, grid, chunk_rng, count))

    hits = sum(scheduler.run(job, n, rng))
    estimate = Estimate.from_hits(hits, n, grid.step)
    if not estimate.reliable:
        logger.warning(f"only {hits} exceedances of u={u} in {n} paths; estimate is unreliable")
    return estimate


def mc_sup_exceedance_levels(
    model: CovarianceModel,
    p: float,
    levels: Sequence[float],
    step: float,
    n: int,
    rng: RngStream,
    scheduler: Optional[ChunkScheduler] = None,
) -> List[Estimate]:
    """
    Exceedance estimates at several levels from one path ensemble.

    Hit counts are non-increasing in the level path by path.
    """
    levels = [require_finite("level", u) for u in levels]
    if p < 0:
        raise ConfigError(f"p must be non-negative, got {p}")
    grid = make_grid(p, step)
    thresholds = np.asarray(levels)
    scheduler = scheduler or ChunkScheduler()

    def job(index: int, count: int, chunk_rng: RngStream) -> np.ndarray:
        hits = np.zeros(len(levels), dtype=np.int64)
        for block in iter_stationary_blocks(model, grid, chunk_rng, count):
            hits += (block.max(axis=1)[:, None] > thresholds[None, :]).sum(axis=0)
        return hits

    hits = sum(scheduler.run(job, n, rng), np.zeros(len(levels), dtype=np.int64))
    return [Estimate.from_hits(int(h), n, grid.step) for h in hits]


def pickands_approximation(alpha: float, p: float, u: float, H: float) -> float:
    """H p u^(2/alpha) Psi(u)."""
    require_alpha(alpha)
    for name, value in (("p", p), ("u", u), ("H", H)):
        require_positive(name, value)
    return H * p * u ** (2.0 / alpha) * std_normal_tail(u)


def pickands_upper_envelope(alpha: float, p: float, u: float, T: float, H_T: float) -> float:
    """(p/T) H(T) u^(2/alpha) Psi(u), the limiting (N_p + 1)-block union bound."""
    require_positive("T", T)
    return pickands_approximation(alpha, p, u, H_T / T)


def interval_partition(p: float, u: float, alpha: float, T: float) -> IntervalPartition:
    """
    Blocks of length u^(-2/alpha) T covering [0, p].

    N_p = floor(p / (u^(-2/alpha) T)); blocks 0..N_p are returned, so the
    union reaches past p. N_p < 2 is flagged as degenerate.
    """
    require_positive("p", p)
    require_positive("T", T)
    length = natural_scale(u, alpha) * T
    n_p = int(math.floor(p / length + 1e-9))
    blocks = tuple((k * length, (k + 1) * length) for k in range(n_p + 1))
    partition = IntervalPartition(p=p, u=u, alpha=alpha, T=T, block_length=length, N_p=n_p, blocks=blocks)
    if partition.degenerate:
        logger.info(f"partition of [0,{p}] at u={u}, T={T} is degenerate (N_p={n_p})")
    return partition


def bonferroni_lower(singles: Sequence[float], pairs: np.ndarray) -> float:
    """
    sum_i P(A_i) - sum_{i<j} P(A_i A_j).

    Only the strict upper triangle of `pairs` is read. The result may be
    negative and is returned as is.

    Raises:
        ConfigError: shapes disagree or a probability lies outside [0, 1]
    """
    singles = np.asarray(singles, dtype=float)
    pairs = np.asarray(pairs, dtype=float)
    k = singles.shape[0]
    if singles.ndim != 1 or pairs.shape != (k, k):
        raise ConfigError(f"pairs must be {k}x{k} for {k} singles, got {pairs.shape}")
    upper = np.triu(pairs, 1)
    for name, values in (("singles", singles), ("pairs", upper)):
        if np.any(values < 0) or np.any(values > 1) or not np.all(np.isfinite(values)):
            raise ConfigError(f"{name} must be probabilities in [0, 1]")
    return math.fsum(singles) - math.fsum(upper.ravel())


def brute_force_union(
    atoms: Sequence[float], events: Sequence[Sequence[int]]
) -> Tuple[float, List[float], np.ndarray]:
    """
    Exact union, single and pairwise probabilities on a finite space.

    Args:
        atoms: Atom probabilities summing to 1
        events: Each event as a collection of atom indices

    Returns:
        Tuple of (union probability, singles, upper-triangular pairs)
    """
    atoms = np.asarray(atoms, dtype=float)
    if np.any(atoms < 0) or not math.isclose(math.fsum(atoms), 1.0, abs_tol=1e-9):
        raise ConfigError("atom probabilities must be non-negative and sum to 1")
    sets = [frozenset(int(i) for i in event) for event in events]
    for event in sets:
        if any(i < 0 or i >= atoms.shape[0] for i in event):
            raise ConfigError(f"event {sorted(event)} indexes outside {atoms.shape[0]} atoms")

    def mass(indices) -> float:
        return math.fsum(atoms[i] for i in indices)

    singles = [mass(event) for event in sets]
    pairs = np.zeros((len(sets), len(sets)))
    for i, j in itertools.combinations(range(len(sets)), 2):
        pairs[i, j] = mass(sets[i] & sets[j])
    union = mass(frozenset().union(*sets)) if sets else 0.0
    return union, singles, pairs


def random_finite_space(rng: RngStream, max_atoms: int = 16, max_events: int = 6) -> Tuple[np.ndarray, List[List[int]]]:
    """Random atom masses (at most max_atoms) and 1..max_events random events."""
    gen = rng.generator
    n_atoms = int(gen.integers(1, max_atoms + 1))
    atoms = gen.dirichlet(np.ones(n_atoms))
    n_events = int(gen.integers(1, max_events + 1))
    events = [np.flatnonzero(gen.random(n_atoms) < gen.random()).tolist() for _ in range(n_events)]
    return atoms, events


def exceedance_bracketing(
    model: CovarianceModel,
    p: float,
    u: float,
    alpha: float,
    T: float,
    step: float,
    n: int,
    H: float,
    rng: RngStream,
    scheduler: Optional[ChunkScheduler] = None,
    H_T: Optional[float] = None,
) -> BoundsReport:
    """
    Bracket P(sup_[0,p] X > u) by the double-sum bounds on one ensemble.

    Every path is sampled on [0, max(p, (N_p+1) L)]. Per path the block
    indicators b_k give the Bonferroni term sum_{k<N_p} b_k - sum_{i<j<N_p} b_i b_j,
    which never exceeds the block-union indicator, which never exceeds
    the full-horizon indicator, which never exceeds sum_{k<=N_p} b_k.
    Averaging block and lag-pair frequencies over positions gives the
    stationary forms N_p P(Delta_0) - sum_k (N_p - k) P(Delta_0, Delta_k)
    and (N_p + 1) P(Delta_0).

    Args:
        model: Stationary model; its alpha must equal `alpha`
        p: Horizon
        u: Level
        alpha: Local index of the covariance
        T: Block length in natural units
        step: Grid step
        n: Number of paths
        H: Pickands constant used for the asymptotic value
        rng: Parent stream
        scheduler: Chunk runner
        H_T: Optional estimate of H(T) for the upper envelope

    Returns:
        BoundsReport
    """
    require_alpha(alpha)
    if model.alpha != alpha:
        raise ConfigError(f"model alpha {model.alpha} differs from partition alpha {alpha}")
    partition = interval_partition(p, u, alpha, T)
    horizon = max(p, (partition.N_p + 1) * partition.block_length)
    grid = make_grid(horizon, step)
    _check_step(u, alpha, grid.step)
    times = grid.points
    full_mask = times <= max(p, partition.N_p * partition.block_length) + 1e-9 * grid.step
    block_masks = [_interval_mask(times, block, grid.step) for block in partition.blocks]
    if not all(mask.any() for mask in block_masks):
        raise ConfigError(f"step={grid.step} leaves Pickands blocks of length {partition.block_length} without grid points")
    scheduler = scheduler or ChunkScheduler()
    n_p = partition.N_p

    def job(index: int, count: int, chunk_rng: RngStream) -> Tuple[int, int, np.ndarray, np.ndarray]:
        full = 0
        union = 0
        block_counts = np.zeros(n_p + 1, dtype=np.int64)
        pair_counts = np.zeros((n_p + 1, n_p + 1), dtype=np.int64)
        for paths in iter_stationary_blocks(model, grid, chunk_rng, count):
            above = paths > u
            full += int(above[:, full_mask].any(axis=1).sum())
            hits = np.column_stack([above[:, mask].any(axis=1) for mask in block_masks]).astype(np.int64)
            union += int(hits[:, :n_p].any(axis=1).sum())
            block_counts += hits.sum(axis=0)
            pair_counts += hits.T @ hits
        return full, union, block_counts, pair_counts

    results = scheduler.run(job, n, rng)
    full_count = sum(r[0] for r in results)
    union_count = sum(r[1] for r in results)
    block_counts = sum((r[2] for r in results), np.zeros(n_p + 1, dtype=np.int64))
    pair_counts = sum((r[3] for r in results), np.zeros((n_p + 1, n_p + 1), dtype=np.int64))

    inner_pairs = np.triu(pair_counts[:n_p, :n_p], 1)
    lower_count = int(block_counts[:n_p].sum() - inner_pairs.sum())
    upper_count = int(block_counts.sum())
    if not lower_count <= union_count <= full_count <= upper_count:
        raise NumericalError(
            f"pathwise bracketing violated: {lower_count} <= {union_count} <= {full_count} <= {upper_count}"
        )

    single = upper_count / ((n_p + 1) * n)
    pair_lags = tuple(
        float(np.mean(np.diagonal(pair_counts[:n_p, :n_p], offset=k))) / n for k in range(1, n_p)
    )
    sigma2 = math.fsum((n_p - k) * pair_lags[k - 1] for k in range(1, n_p))
    lower = bonferroni_lower(block_counts[:n_p] / n, pair_counts[:n_p, :n_p] / n) if n_p > 0 else 0.0

    flags = []
    if partition.degenerate:
        flags.append("degenerate_partition")
    mc = Estimate.from_hits(full_count, n, grid.step)
    flags.extend(mc.flags)
    psi = std_normal_tail(u)
    report = BoundsReport(
        mc=mc,
        bonferroni_lower=lower,
        union_upper=upper_count / n,
        pickands_value=pickands_approximation(alpha, p, u, H),
        partition=partition,
        step=grid.step,
        seed=rng.seed,
        full_count=full_count,
        lower_count=lower_count,
        union_count=union_count,
        upper_count=upper_count,
        single=single,
        pair_lags=pair_lags,
        sigma2=sigma2,
        block_ratio=single / psi,
        upper_envelope=None if H_T is None else pickands_upper_envelope(alpha, p, u, T, H_T),
        flags=tuple(flags),
    )
    logger.info(
        f"P(sup > {u}) on [0,{p}]: {mc.mean:.5g} in [{report.bonferroni_lower:.5g}, {report.union_upper:.5g}], "
        f"asymptotic {report.pickands_value:.5g}"
    )
    return report


def block_exceedance_ratio(
    model: CovarianceModel,
    u: float,
    T: float,
    step: Optional[float],
    n: int,
    rng: RngStream,
    scheduler: Optional[ChunkScheduler] = None,
) -> Estimate:
    """P(sup over [0, u^(-2/alpha) T] > u) / Psi(u); tends to H(T) as u grows."""
    require_positive("T", T)
    step = step or default_step(u, model.alpha)
    estimate = mc_sup_exceedance(model, natural_scale(u, model.alpha) * T, u, step, n, rng, scheduler)
    return estimate.scaled(1.0 / std_normal_tail(u))


def joint_exceedance_counts(
    model: CovarianceModel,
    A: Interval,
    B: Interval,
    u: float,
    step: float,
    n: int,
    rng: RngStream,
    scheduler: Optional[ChunkScheduler] = None,
) -> Tuple[Estimate, Estimate, Estimate]:
    """
    Marginal and joint exceedance estimates for two disjoint intervals.

    Returns:
        Tuple of (joint, first marginal, second marginal) estimates
    """
    require_finite("u", u)
    (a0, a1), (b0, b1) = A, B
    if a1 < a0 or b1 < b0:
        raise ConfigError(f"intervals must be ordered, got {A} and {B}")
    if not (a1 < b0 or b1 < a0):
        raise ConfigError(f"intervals {A} and {B} overlap")
    origin = min(a0, b0)
    grid = make_grid(max(a1, b1) - origin, step, start=origin)
    _check_step(u, model.alpha, grid.step)
    times = grid.points
    mask_a = _interval_mask(times, A, grid.step)
    mask_b = _interval_mask(times, B, grid.step)
    if not mask_a.any() or not mask_b.any():
        raise ConfigError(f"step={step} leaves an interval without grid points")
    scheduler = scheduler or ChunkScheduler()

    def job(index: int, count: int, chunk_rng: RngStream) -> Tuple[int, int, int]:
        first = second = both = 0
        for paths in iter_stationary_blocks(model, grid, chunk_rng, count):
            hit_a = paths[:, mask_a].max(axis=1) > u
            hit_b = paths[:, mask_b].max(axis=1) > u
            first += int(hit_a.sum())
            second += int(hit_b.sum())
            both += int((hit_a & hit_b).sum())
        return first, second, both

    results = scheduler.run(job, n, rng)
    first, second, both = (sum(r[i] for r in results) for i in range(3))
    return (
        Estimate.from_hits(both, n, grid.step),
        Estimate.from_hits(first, n, grid.step),
        Estimate.from_hits(second, n, grid.step),
    )


def mc_joint_exceedance(
    model: CovarianceModel,
    A: Interval,
    B: Interval,
    u: float,
    step: float,
    n: int,
    rng: RngStream,
    scheduler: Optional[ChunkScheduler] = None,
) -> Estimate:
    """Probability that both grid maxima, over A and over B, exceed u."""
    joint, _, _ = joint_exceedance_counts(model, A, B, u, step, n, rng, scheduler)
    return joint


def lemdlak_scale(alpha: float) -> float:
    """C = (2 sqrt(2) / sqrt(7))^(2/alpha) 16^(1/alpha)."""
    require_alpha(alpha)
    return (2.0 * math.sqrt(2.0) / math.sqrt(7.0)) ** (2.0 / alpha) * 16.0 ** (1.0 / alpha)


def lemdlak_constant(alpha: float, t0: float, T: float, H_square: float) -> float:
    """
    4 ceil(C T) ceil(C (t0 + T)) exp(-(t0 - T)^alpha / 8) H([0,1]^2).

    Bounds P(both blocks [0, T] and [t0, t0 + T], in natural units, exceed u)
    by this constant times Psi(u) for large u.
    """
    require_positive("T", T)
    require_positive("H_square", H_square)
    require_finite("t0", t0)
    if t0 <= T:
        raise ConfigError(f"t0={t0} must exceed T={T}")
    scale = lemdlak_scale(alpha)
    return (
        4.0
        * math.ceil(scale * T)
        * math.ceil(scale * (t0 + T))
        * math.exp(-((t0 - T) ** alpha) / 8.0)
        * H_square
    )


def joint_bound_check(
    model: CovarianceModel,
    T: float,
    t0: float,
    u: float,
    H_square: float,
    n: int,
    rng: RngStream,
    step: Optional[float] = None,
    scheduler: Optional[ChunkScheduler] = None,
) -> JointBoundReport:
    """
    Compare MC joint exceedance / Psi(u) with lemdlak_constant.

    A reliable joint estimate decides directly: the bound holds when
    ratio <= constant * (1 + 4 relative stderr). Otherwise a reliable
    first-block estimate with first_ratio * (1 + 4 relative stderr) <= constant
    certifies it. With neither, `holds` is None and the report keeps the
    joint estimate's `unreliable` flag.
    """
    alpha = model.alpha
    constant = lemdlak_constant(alpha, t0, T, H_square)
    scale = natural_scale(u, alpha)
    step = step or default_step(u, alpha)
    epsilon = model.local_condition_epsilon()
    level_floor = ((t0 - T) / epsilon) ** (alpha / 2.0) if epsilon > 0 else math.inf
    joint, first, second = joint_exceedance_counts(
        model, (0.0, scale * T), (scale * t0, scale * (t0 + T)), u, step, n, rng, scheduler
    )
    psi = std_normal_tail(u)
    ratio = joint.mean / psi
    first_ratio = first.mean / psi

    marginal_holds = None
    if first.reliable:
        marginal_holds = first_ratio * (1.0 + 4.0 * first.stderr / first.mean) <= constant

    flags = []
    if joint.reliable:
        holds = ratio <= constant * (1.0 + 4.0 * joint.stderr / joint.mean)
    elif marginal_holds:
        holds = True
    else:
        holds = None
        flags.extend(joint.flags)
        logger.warning(
            f"{joint.mean * n:.0f} joint and {first.mean * n:.0f} first-block hits at u={u}; bound undecided"
        )
    if u < level_floor:
        flags.append("below_level_floor")
        logger.info(f"u={u} is below the proven level {level_floor:.4g} for t0={t0}, T={T}")
    if holds is False:
        logger.warning(f"joint exceedance ratio {ratio:.4g} exceeds C={constant:.4g} at u={u}")
    return JointBoundReport(
        alpha=alpha, T=T, t0=t0, u=u, joint=joint, first=first, second=second,
        ratio=ratio, constant=constant, holds=holds, first_ratio=first_ratio,
        marginal_holds=marginal_holds, epsilon=epsilon, level_floor=level_floor, flags=tuple(flags),
    )


def borell_bound(m: float, sigma2: float, w: float) -> float:
    """exp(-(w - m)^2 / (2 sigma^2)) for w >= m."""
    require_finite("m", m)
    require_positive("sigma2", sigma2)
    require_finite("w", w)
    if w < m:
        raise ConfigError(f"Borell bound needs w >= m, got w={w} < m={m}")
    return math.exp(-((w - m) ** 2) / (2.0 * sigma2))


def borell_check(
    model: CovarianceModel,
    p: float,
    step: float,
    n: int,
    rng: RngStream,
    levels: int = 10,
    span: float = 3.0,
    scheduler: Optional[ChunkScheduler] = None,
) -> BorellReport:
    """
    Borell dominance on one ensemble of grid suprema.

    m_hat is the ensemble mean of the supremum; the maximal pointwise
    variance of a unit-variance stationary process is 1. Levels run from
    m_hat to m_hat + span.
    """
    require_positive("p", p)
    grid = make_grid(p, step)
    scheduler = scheduler or ChunkScheduler()

    def job(index: int, count: int, chunk_rng: RngStream) -> np.ndarray:
        return np.concatenate([block.max(axis=1) for block in iter_stationary_blocks(model, grid, chunk_rng, count)])

    sups = np.concatenate(scheduler.run(job, n, rng))
    m_hat = math.fsum(sups) / n
    report = BorellReport(m_hat=m_hat, sigma2=1.0)
    for w in m_hat + np.linspace(0.0, span, levels):
        tail = Estimate.from_hits(int((sups > w).sum()), n, grid.step)
        bound = borell_bound(m_hat, 1.0, float(w))
        report.levels.append(
            BorellLevel(w=float(w), tail=tail, bound=bound, dominated=tail.mean <= bound + 4.0 * tail.stderr)
        )
    return report


def _check_slepian_inputs(covX: np.ndarray, covY: np.ndarray, means: np.ndarray) -> None:
    if covX.shape != covY.shape or covX.ndim != 2 or covX.shape[0] != covX.shape[1]:
        raise ConfigError(f"covariances must be square of equal shape, got {covX.shape} and {covY.shape}")
    if means.shape != (covX.shape[0],):
        raise ConfigError(f"means must have length {covX.shape[0]}, got {means.shape}")
    for i in range(covX.shape[0]):
        if not math.isclose(covX[i, i], covY[i, i], rel_tol=1e-12, abs_tol=1e-12):
            raise ConfigError(f"diagonals differ at entry ({i},{i}): {covX[i, i]} vs {covY[i, i]}")
    violations = np.argwhere(covX > covY + 1e-12)
    if violations.size:
        i, j = violations[0]
        raise ConfigError(f"covX exceeds covY at entry ({i},{j}): {covX[i, j]} > {covY[i, j]}")
    for name, cov in (("covX", covX), ("covY", covY)):
        try:
            cholesky_factor(cov)
        except NumericalError as e:
            raise ConfigError(f"{name} is not positive semidefinite: {e}")


def slepian_check(
    covX: np.ndarray,
    covY: np.ndarray,
    means: np.ndarray,
    u: float,
    n: int,
    rng: RngStream,
    scheduler: Optional[ChunkScheduler] = None,
) -> SlepianReport:
    """
    MC estimates of P(max X < u) and P(max Y < u) under the Slepian ordering.

    Both vectors are built from the same standard normals (common random
    numbers). consistent = pX <= pY + 4 combined stderr.
    """
    covX = np.asarray(covX, dtype=float)
    covY = np.asarray(covY, dtype=float)
    means = np.atleast_1d(np.asarray(means, dtype=float))
    require_finite("u", u)
    _check_slepian_inputs(covX, covY, means)
    factor_x = cholesky_factor(covX)
    factor_y = cholesky_factor(covY)
    scheduler = scheduler or ChunkScheduler()

    def job(index: int, count: int, chunk_rng: RngStream) -> Tuple[int, int]:
        normals = chunk_rng.standard_normal((count, covX.shape[0]))
        below_x = int(((means + normals @ factor_x.T).max(axis=1) < u).sum())
        below_y = int(((means + normals @ factor_y.T).max(axis=1) < u).sum())
        return below_x, below_y

    results = scheduler.run(job, n, rng)
    pX = Estimate.from_hits(sum(r[0] for r in results), n, 0.0)
    pY = Estimate.from_hits(sum(r[1] for r in results), n, 0.0)
    consistent = pX.mean <= pY.mean + 4.0 * math.hypot(pX.stderr, pY.stderr)
    return SlepianReport(pX=pX, pY=pY, consistent=consistent)


def bivariate_normal_rectangle(rho: float, u: float, lower: float = -12.0) -> float:
    """
    P(X1 < u, X2 < u) for standard normals with correlation rho.

    Adaptive tensor quadrature of the bivariate density on [lower, u]^2.
    """
    require_finite("rho", rho)
    require_finite("u", u)
    if not -1.0 < rho < 1.0:
        raise ConfigError(f"rho must lie in (-1, 1), got {rho}")
    if u <= lower:
        return 0.0
    det = 1.0 - rho * rho
    norm = 1.0 / (2.0 * math.pi * math.sqrt(det))

    def density(y: float, x: float) -> float:
        return norm * math.exp(-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * det))

    value, error = dblquad(density, lower, u, lower, u, epsabs=1e-12, epsrel=1e-10)
    if error > 1e-8:
        raise NumericalError(f"rectangle quadrature did not converge: error {error:.2e}")
    return value


@dataclass
class BonferroniOracleReport:
    """Bonferroni lower bound against brute-force unions on random finite spaces."""

    trials: int
    violations: int = 0
    max_gap: float = 0.0
    min_gap: float = math.inf

    @property
    def holds(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> Dict:
        return {
            "trials": self.trials,
            "violations": self.violations,
            "max_gap": self.max_gap,
            "min_gap": self.min_gap,
            "holds": self.holds,
        }


def bonferroni_oracle(trials: int, rng: RngStream) -> BonferroniOracleReport:
    """
    Check sum P(A_i) - sum P(A_i A_j) <= P(union) <= sum P(A_i) exactly.

    Trial i draws its space from rng.child(i). The gap is union minus the
    Bonferroni term and must be non-negative up to rounding.
    """
    if trials < 1:
        raise ConfigError(f"trials must be positive, got {trials}")
    report = BonferroniOracleReport(trials=trials)
    for i in range(trials):
        atoms, events = random_finite_space(rng.child(i))
        union, singles, pairs = brute_force_union(atoms, events)
        gap = union - bonferroni_lower(singles, pairs)
        if gap < -1e-12 or union > math.fsum(singles) + 1e-12:
            report.violations += 1
            logger.error(f"Bonferroni bracket violated in trial {i}: union={union}, gap={gap}")
        report.max_gap = max(report.max_gap, gap)
        report.min_gap = min(report.min_gap, gap)
    return report
