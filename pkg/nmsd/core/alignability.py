"""
Two-sample alignability statistic and its chi-square calibration.
"""

import logging
import math

import numpy as np
from scipy.stats import chi2, poisson

from nmsd import config
from nmsd.core.errors import InvalidInput
from nmsd.core.linalg import pseudoinverse
from nmsd.models.results import SpectralProfile

logger = logging.getLogger(__name__)

SERIES_TOL = 1e-12


def t_pi(
    pi1: SpectralProfile,
    pi2: SpectralProfile,
    v1: np.ndarray,
    v2: np.ndarray,
    rank_tol: float = config.RANK_TOL,
) -> float:
    """
    Wald statistic Δᵀ(V₁ + V₂)⁺Δ for the profile difference Δ = π₁ - π₂.

    Raises:
        InvalidInput: If the profiles or covariances disagree in rank
    """
    if pi1.r != pi2.r:
        raise InvalidInput(f"Profiles have different ranks: {pi1.r} and {pi2.r}")
    v_delta = np.asarray(v1, dtype=float) + np.asarray(v2, dtype=float)
    if v_delta.shape != (pi1.r, pi1.r):
        raise InvalidInput(f"Covariances must be {pi1.r}x{pi1.r}, got {v_delta.shape}")
    delta = pi1.pi - pi2.pi
    return noncentrality(delta, v_delta, rank_tol)


def noncentrality(delta: np.ndarray, v_delta: np.ndarray, rank_tol: float = config.RANK_TOL) -> float:
    """Quadratic form Δᵀ V_Δ⁺ Δ, clamped at zero."""
    delta = np.asarray(delta, dtype=float)
    if not np.any(delta):
        return 0.0
    value = float(delta @ pseudoinverse(v_delta, rank_tol) @ delta)
    return max(value, 0.0)


def separation_bound(delta: np.ndarray, v_delta: np.ndarray) -> float:
    """Lower bound ‖Δ‖² / λ_max(V_Δ) of the noncentrality."""
    lam_max = float(np.max(np.linalg.eigvalsh(np.asarray(v_delta, dtype=float))))
    if lam_max <= 0:
        return math.inf
    return float(np.dot(delta, delta)) / lam_max


def chi2_sf(x: float, df: int) -> float:
    """Upper-tail probability of the chi-square law with df degrees of freedom."""
    if df < 1:
        raise InvalidInput(f"Degrees of freedom must be >= 1, got {df}")
    if x <= 0:
        return 1.0
    return float(chi2.sf(x, df))


def chi2_quantile(q: float, df: int) -> float:
    """
    Quantile of the chi-square law.

    Raises:
        InvalidInput: If q is outside (0, 1)
    """
    if not 0 < q < 1:
        raise InvalidInput(f"Quantile level must lie in (0, 1), got {q}")
    if df < 1:
        raise InvalidInput(f"Degrees of freedom must be >= 1, got {df}")
    return float(chi2.ppf(q, df))


def chi2_tail_bound(x: float, df: int) -> float:
    """Chernoff bound exp(-½[x - df - df·ln(x/df)]) on P(χ²_df ≥ x), for x > df."""
    if x <= df:
        return 1.0
    return math.exp(-0.5 * (x - df - df * math.log(x / df)))


def noncentral_chi2_power(lambda_nc: float, df: int, alpha: float = config.DEFAULT_ALPHA) -> float:
    """
    Rejection probability of the level-alpha chi-square test under a
    noncentral chi-square law, summed as a Poisson mixture of central tails.

    The series stops once the remaining Poisson mass is below 1e-12.
    """
    if lambda_nc < 0:
        raise InvalidInput(f"Noncentrality must be non-negative, got {lambda_nc}")
    critical = chi2_quantile(1 - alpha, df)
    if lambda_nc == 0:
        return chi2_sf(critical, df)

    mu = lambda_nc / 2.0
    total = 0.0
    k = 0
    while True:
        total += poisson.pmf(k, mu) * chi2_sf(critical, df + 2 * k)
        if k >= mu and poisson.sf(k, mu) < SERIES_TOL:
            break
        k += 1
    return float(min(total, 1.0))
