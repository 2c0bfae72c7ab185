"""
Scalar Gaussian analytics and dense multivariate normal sampling.

Covers the standard normal tail Psi(u) = 1 - Phi(u) with its Mills-ratio
sandwich, the Lanczos Gamma function, the conditional decomposition of a
Gaussian pair and an exact (semi)definite multivariate normal sampler.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from loguru import logger
from scipy.special import erfc

from .exceptions import ConfigError, NumericalError
from .rng import RngStream
from .utils import require_finite, require_positive

SQRT_2PI = math.sqrt(2.0 * math.pi)

# Above this level the tail is taken from the Mills-ratio continued fraction.
_CF_THRESHOLD = 6.0
_CF_DEPTH = 80

# Lanczos approximation, g = 7, 9 coefficients.
_LANCZOS_G = 7
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

# Eigenvalues above -PSD_TOLERANCE * trace are treated as zero.
PSD_TOLERANCE = 1e-10


@dataclass(frozen=True)
class ConditionalDecomposition:
    """X2 = slope * X1 + Z with Z independent of X1."""

    slope: float
    residual_mean: float
    residual_variance: float


def std_normal_pdf(u: float) -> float:
    """Standard normal density phi(u)."""
    return math.exp(-0.5 * u * u) / SQRT_2PI


def _mills_ratio_cf(u: float) -> float:
    """Psi(u)/phi(u) for large u, by backward evaluation of the continued fraction."""
    tail = u
    for k in range(_CF_DEPTH, 0, -1):
        tail = u + k / tail
    return 1.0 / tail


def std_normal_tail(u: float) -> float:
    """
    Standard normal upper tail Psi(u) = 1 - Phi(u).

    Uses the complementary error function on [-6, 6] and the Mills-ratio
    continued fraction beyond, which keeps full relative precision deep in
    the tail.

    Args:
        u: Level

    Returns:
        float: Psi(u)
    """
    require_finite("u", u)
    if u > _CF_THRESHOLD:
        return std_normal_pdf(u) * _mills_ratio_cf(u)
    if u < -_CF_THRESHOLD:
        return 1.0 - std_normal_pdf(-u) * _mills_ratio_cf(-u)
    return 0.5 * float(erfc(u / math.sqrt(2.0)))


def std_normal_cdf(u: float) -> float:
    """Phi(u) = Psi(-u)."""
    return std_normal_tail(-u)


def mills_asymptotic(u: float) -> float:
    """Leading asymptotic phi(u)/u of Psi(u)."""
    require_positive("u", u)
    return std_normal_pdf(u) / u


def psi_sandwich(u: float) -> Tuple[float, float]:
    """
    Bounds ((1/u - 1/u^3) phi(u), phi(u)/u) around Psi(u).

    The strict sandwich holds for u > 1; at u <= 1 the lower end is <= 0.

    Args:
        u: Positive level

    Returns:
        Tuple of (lower, upper)
    """
    require_positive("u", u)
    density = std_normal_pdf(u)
    return (1.0 / u - 1.0 / u ** 3) * density, density / u


def gamma_fn(x: float) -> float:
    """
    Gamma function by the Lanczos approximation (g=7, 9 terms).

    Args:
        x: Positive argument

    Returns:
        float: Gamma(x)
    """
    require_positive("x", x)
    if x < 0.5:
        # Reflection keeps the series in its accurate range.
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))

    z = x - 1.0
    series = _LANCZOS_COEFFS[0]
    for i, coeff in enumerate(_LANCZOS_COEFFS[1:], start=1):
        series += coeff / (z + i)
    t = z + _LANCZOS_G + 0.5
    return SQRT_2PI * t ** (z + 0.5) * math.exp(-t) * series


def conditional_gaussian(m1: float, m2: float, v1: float, v2: float, cov: float) -> ConditionalDecomposition:
    """
    Decompose X2 = slope * X1 + Z with Z independent of X1.

    Args:
        m1: Mean of X1
        m2: Mean of X2
        v1: Variance of X1
        v2: Variance of X2
        cov: Cov(X1, X2)

    Returns:
        ConditionalDecomposition with slope cov/v1, residual mean
        m2 - slope*m1 and residual variance v2 - cov^2/v1
    """
    for name, value in (("m1", m1), ("m2", m2), ("cov", cov)):
        require_finite(name, value)
    require_positive("v1", v1)
    require_finite("v2", v2)
    if v2 < 0:
        raise ConfigError(f"v2 must be non-negative, got {v2}")
    if cov * cov > v1 * v2 * (1.0 + 1e-12):
        raise ConfigError(f"cov^2={cov * cov} exceeds v1*v2={v1 * v2}: not a Gaussian vector")

    slope = cov / v1
    residual_variance = max(v2 - cov * cov / v1, 0.0)
    return ConditionalDecomposition(
        slope=slope,
        residual_mean=m2 - slope * m1,
        residual_variance=residual_variance,
    )


def cholesky_factor(covariance: np.ndarray) -> np.ndarray:
    """
    Factor L with L @ L.T == covariance.

    Tries a plain Cholesky first. Semidefinite inputs (rank-deficient
    covariances, circulant rounding) fall back to a symmetric eigen
    factorization in which eigenvalues down to -1e-10 * trace count as zero.

    Args:
        covariance: Symmetric positive semidefinite matrix

    Returns:
        np.ndarray: Square factor

    Raises:
        ConfigError: matrix is not square and symmetric
        NumericalError: matrix is indefinite beyond tolerance
    """
    cov = np.atleast_2d(np.asarray(covariance, dtype=float))
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ConfigError(f"covariance must be square, got shape {cov.shape}")
    if not np.all(np.isfinite(cov)):
        raise ConfigError("covariance has non-finite entries")
    scale = max(float(np.max(np.abs(cov))), 1.0)
    if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * scale):
        raise ConfigError("covariance must be symmetric")

    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        logger.debug(f"Cholesky failed on {cov.shape[0]}x{cov.shape[0]} matrix, using eigen factorization")

    eigenvalues, eigenvectors = np.linalg.eigh(0.5 * (cov + cov.T))
    tolerance = PSD_TOLERANCE * max(float(np.trace(cov)), 0.0)
    if eigenvalues.min() < -tolerance:
        raise NumericalError(
            f"covariance is not positive semidefinite: eigenvalue {eigenvalues.min():.3e} "
            f"below tolerance {-tolerance:.3e}"
        )
    return eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))


def cholesky_sample_batch(mean: np.ndarray, covariance: np.ndarray, rng: RngStream, size: int) -> np.ndarray:
    """
    Draw `size` multivariate normal vectors.

    Args:
        mean: Mean vector of length d
        covariance: d x d PSD covariance
        rng: Random stream
        size: Number of draws

    Returns:
        np.ndarray: (size, d) sample matrix
    """
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    factor = cholesky_factor(covariance)
    if factor.shape[0] != mean.shape[0]:
        raise ConfigError(f"mean has length {mean.shape[0]} but covariance is {factor.shape[0]}x{factor.shape[0]}")
    if size < 1:
        raise ConfigError(f"size must be positive, got {size}")
    normals = rng.standard_normal((size, factor.shape[1]))
    return mean + normals @ factor.T


def cholesky_sample(mean: np.ndarray, covariance: np.ndarray, rng: RngStream) -> np.ndarray:
    """Single multivariate normal draw with the given mean and covariance."""
    return cholesky_sample_batch(mean, covariance, rng, 1)[0]
