"""
Spike inference under diagonal heteroskedastic noise.

The outlier map θ sends a conditional population spike to the location of its
sample-covariance outlier. Inverting θ on its supercritical branch and applying
the closed-form secular solution d² = -1/g(ξ) recovers the signal strengths,
whose normalization is the spectral profile.
"""

import logging
import math

import numpy as np
import scipy.optimize

from nmsd import config
from nmsd.core.errors import (
    BracketFailure,
    DomainError,
    InvalidInput,
    NumericalFailure,
    SubcriticalSpike,
)
from nmsd.core.linalg import sample_covariance, sym_eig
from nmsd.models.data import DataMatrix
from nmsd.models.results import NoiseModel, SpectralProfile, SpikeSet

logger = logging.getLogger(__name__)


def _resolvent(sigma: np.ndarray, s: float) -> np.ndarray:
    """Diagonal of (Σ - sI)^{-1}, checking that s lies above the noise spectrum."""
    sigma = np.asarray(sigma, dtype=float)
    top = float(np.max(sigma))
    if not s > top + config.DOMAIN_MARGIN:
        raise DomainError(f"Spike location {s!r} is not above the noise spectrum (max {top!r})")
    return 1.0 / (sigma - s)


def g_fn(sigma: np.ndarray, s: float) -> float:
    """(1/p) Σ 1/(σ_i - s); negative on the admissible domain."""
    return float(np.mean(_resolvent(sigma, s)))


def s2_fn(sigma: np.ndarray, s: float) -> float:
    """Σ 1/(σ_i - s)^2."""
    return float(np.sum(_resolvent(sigma, s) ** 2))


def theta(sigma: np.ndarray, n: int, s: float) -> float:
    """Outlier map s + (1/N) Σ s σ_i / (s - σ_i)."""
    sigma = np.asarray(sigma, dtype=float)
    inv = -_resolvent(sigma, s)
    return float(s + np.sum(s * sigma * inv) / n)


def theta_prime(sigma: np.ndarray, n: int, s: float) -> float:
    """Derivative 1 - (1/N) Σ σ_i^2 / (s - σ_i)^2."""
    sigma = np.asarray(sigma, dtype=float)
    inv = _resolvent(sigma, s)
    return float(1.0 - np.sum((sigma * inv) ** 2) / n)


def _grow_bracket(fn, lower: float, start: float) -> float:
    """Double an upper bound until fn turns positive, up to the bracket ceiling."""
    upper = max(start, 2.0 * lower, 1.0)
    while fn(upper) <= 0:
        upper *= 2.0
        if upper > config.BRACKET_CEILING:
            raise BracketFailure(f"No bracket found below s = {config.BRACKET_CEILING:g}")
    return upper


def critical_point(sigma: np.ndarray, n: int) -> float:
    """
    The unique zero s* of θ′ on (max σ, ∞).

    θ′ increases from -∞ to 1 on this interval, so bisection is safe. When the
    noise is so small that θ′ is already positive at the edge of the domain,
    the edge is returned.
    """
    sigma = np.asarray(sigma, dtype=float)
    top = float(np.max(sigma))
    lower = top + 2 * config.DOMAIN_MARGIN * max(1.0, top)
    fn = lambda s: theta_prime(sigma, n, s)
    if fn(lower) >= 0:
        return lower
    upper = _grow_bracket(fn, lower, 2.0 * top)
    return _bisect(fn, lower, upper)


def supercritical_threshold(sigma: np.ndarray, n: int) -> float:
    """θ(s*): the smallest sample eigenvalue an isolated spike can produce."""
    return theta(sigma, n, critical_point(sigma, n))


def _bisect(fn, lower: float, upper: float) -> float:
    try:
        return float(scipy.optimize.bisect(
            fn, lower, upper,
            xtol=1e-14, rtol=4 * np.finfo(float).eps,
            maxiter=config.BISECTION_MAXITER,
        ))
    except RuntimeError as e:
        raise NumericalFailure(f"Bisection did not converge: {e}")


def invert_theta(sigma: np.ndarray, n: int, lambda_j: float, index: int = 1) -> float:
    """
    Solve θ(s) = lambda_j on the supercritical branch (s*, ∞).

    Args:
        sigma: Noise variances
        n: Sample count
        lambda_j: Sample eigenvalue to invert
        index: 1-based spike index reported in errors

    Returns:
        The unique root above the critical point

    Raises:
        SubcriticalSpike: If lambda_j does not exceed θ(s*) by the tolerance
        BracketFailure: If the root lies beyond the bracket ceiling
    """
    s_star = critical_point(sigma, n)
    floor = theta(sigma, n, s_star)
    tol = config.SUPERCRITICAL_TOL * max(1.0, abs(lambda_j))
    if not lambda_j > floor + tol:
        raise SubcriticalSpike(index, detail=f"lambda={lambda_j:.6g} <= threshold {floor:.6g}")

    fn = lambda s: theta(sigma, n, s) - lambda_j
    upper = _grow_bracket(fn, s_star, max(lambda_j, 2.0 * s_star))
    return _bisect(fn, s_star, upper)


def signal_strengths(xi_hat: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Closed-form secular solution d²_j = -1/g(ξ_j)."""
    return np.array([-1.0 / g_fn(sigma, float(xi)) for xi in np.atleast_1d(xi_hat)])


def profile(d2_hat: np.ndarray) -> SpectralProfile:
    """
    Normalize signal strengths onto the simplex.

    Raises:
        InvalidInput: If any strength is not positive
    """
    d2 = np.asarray(d2_hat, dtype=float).ravel()
    if d2.size == 0 or np.any(~np.isfinite(d2)) or np.any(d2 <= 0):
        raise InvalidInput("Signal strengths must be finite and positive")
    return SpectralProfile(pi=d2 / d2.sum())


def population_profile(semi_axes: np.ndarray) -> SpectralProfile:
    """Profile D²/ΣD² of an ellipsoid with the given semi-axes."""
    D = np.asarray(semi_axes, dtype=float)
    return profile(D ** 2)


def nmsd(pi1: SpectralProfile, pi2: SpectralProfile) -> float:
    """
    Euclidean distance between two spectral profiles.

    Raises:
        InvalidInput: If the profiles have different ranks
    """
    if pi1.r != pi2.r:
        raise InvalidInput(f"Profiles have different ranks: {pi1.r} and {pi2.r}")
    return float(np.linalg.norm(pi1.pi - pi2.pi))


def estimate_spikes(
    Y: DataMatrix, noise: NoiseModel, r: int, center: bool = False
) -> SpikeSet:
    """
    Invert the top-r sample spikes of Y under the fitted noise model.

    Args:
        Y: Data matrix (p×N)
        noise: Fitted noise model of Y
        r: Working rank
        center: Remove feature means before forming the sample covariance

    Returns:
        SpikeSet with eigenvalues, inverted spikes, derivatives and strengths

    Raises:
        SubcriticalSpike: Naming the first spike that fails to invert
    """
    if not 1 <= r <= Y.p:
        raise InvalidInput(f"Rank must satisfy 1 <= r <= p, got r={r}, p={Y.p}")
    if noise.p != Y.p:
        raise InvalidInput(f"Noise model has {noise.p} features, data has {Y.p}")

    eig = sym_eig(sample_covariance(Y, center=center)).top(r)
    sigma = noise.sigma
    n = Y.n

    xi_hat = np.array([
        invert_theta(sigma, n, float(lam), index=j + 1)
        for j, lam in enumerate(eig.eigenvalues)
    ])
    slopes = np.array([theta_prime(sigma, n, xi) for xi in xi_hat])
    d2_hat = signal_strengths(xi_hat, sigma)

    logger.debug("Inverted spikes: lambda=%s xi=%s d2=%s", eig.eigenvalues, xi_hat, d2_hat)
    return SpikeSet(
        lam=eig.eigenvalues.copy(),
        xi_hat=xi_hat,
        theta_prime=slopes,
        d2_hat=d2_hat,
        eigenvectors=eig.eigenvectors.copy(),
        n_samples=n,
        threshold=supercritical_threshold(sigma, n),
    )
