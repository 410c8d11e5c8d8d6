"""
Plug-in asymptotic covariances and confidence intervals.

The covariance of the sample spikes splits into a conditional noise block and a
signal-sampling block. The delta method carries it through θ⁻¹, the secular
solution and the simplex normalization to the spectral profile.
"""

import logging
from typing import Optional

import numpy as np
from scipy.stats import norm

from nmsd import config
from nmsd.core.errors import DegenerateDistance, InvalidInput, NearCriticalSpike
from nmsd.core.linalg import signal_fit
from nmsd.core.spikes import g_fn, s2_fn
from nmsd.models.data import DataMatrix
from nmsd.models.results import (
    CovarianceEstimates,
    IntervalSet,
    NoiseModel,
    SpectralProfile,
    SpikeSet,
)

logger = logging.getLogger(__name__)


def _symmetrize(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.T)


def _m22(eigvecs: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """M₂,₂(k, j) = Σ_a ψ²_{k,a} ψ²_{j,a} σ²_a."""
    sq = eigvecs ** 2
    return sq.T @ (sq * (sigma ** 2)[:, None])


def _quadratic_blocks(eigvecs: np.ndarray, noise: NoiseModel, m_hat: np.ndarray):
    """Return Â = ΨᵀΣ̂Ψ and B̂ = ΨᵀM̂Ψ."""
    A = eigvecs.T @ (eigvecs * noise.sigma[:, None])
    B = eigvecs.T @ m_hat @ eigvecs
    return _symmetrize(A), _symmetrize(B)


def conditional_covariance(
    spikes: SpikeSet,
    eigvecs: np.ndarray,
    noise: NoiseModel,
    m_hat: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Conditional noise block V̂^cond of the spike covariance.

    V^cond = V^(G) + κ₄ θ′θ′ᵀ∘M₂,₂ + 2W + 4 θ′θ′ᵀ∘Â∘B̂ with W = κ₃ θ′θ′ᵀ∘Â∘B̂.
    The Gaussian block V^(G) is diagonal.

    Args:
        spikes: Inverted spikes
        eigvecs: Sample spike eigenvectors (p×r)
        noise: Fitted noise model
        m_hat: Empirical signal covariance; defaults to Û diag(d̂²) Ûᵀ

    Returns:
        Symmetric r×r matrix
    """
    if m_hat is None:
        m_hat = signal_fit(eigvecs, spikes.d2_hat)
    A, B = _quadratic_blocks(eigvecs, noise, m_hat)
    tp = spikes.theta_prime
    xi = spikes.xi_hat
    outer = np.outer(tp, tp)

    v_gauss = np.diag(2 * tp ** 2 * np.diag(A) ** 2 + 2 * xi ** 2 * tp - 2 * xi ** 2 * tp ** 2)
    W = noise.kappa3 * outer * A * B
    v_cond = (
        v_gauss
        + noise.kappa4 * outer * _m22(eigvecs, noise.sigma)
        + 2 * W
        + 4 * outer * A * B
    )
    return _symmetrize(v_cond)


def signal_sampling_covariance(
    Y: DataMatrix,
    eigvecs: np.ndarray,
    noise: NoiseModel,
    m_hat: Optional[np.ndarray] = None,
    d2_hat: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Signal-sampling block Γ̂^sig = (2B̂² + K̂_Y - K̂_ε) / N.

    The fourth-cumulant contractions along the spike directions are computed from
    the projections ψᵀY of the centered data, never forming p⁴ tensors. Under
    diagonal noise K̂_ε[ψk,ψk,ψj,ψj] = κ̂₄ Σ_a ψ²_{k,a} ψ²_{j,a} σ̂²_a.

    Args:
        Y: Data matrix (p×N)
        eigvecs: Sample spike eigenvectors (p×r)
        noise: Fitted noise model
        m_hat: Empirical signal covariance; defaults to the rank-r fit with
            the signal strengths d2_hat
        d2_hat: Signal strengths used for the default m_hat

    Returns:
        Symmetric r×r matrix
    """
    if m_hat is None:
        if d2_hat is None:
            raise InvalidInput("Either m_hat or d2_hat is required")
        m_hat = signal_fit(eigvecs, d2_hat)
    _, B = _quadratic_blocks(eigvecs, noise, m_hat)

    centered = Y.values - Y.values.mean(axis=1, keepdims=True)
    proj = eigvecs.T @ centered
    n = Y.n
    sq = proj ** 2
    fourth = sq @ sq.T / n
    second = sq.mean(axis=1)
    cross = proj @ proj.T / n
    k_y = fourth - np.outer(second, second) - 2 * cross ** 2
    k_eps = noise.kappa4 * _m22(eigvecs, noise.sigma)

    return _symmetrize((2 * B ** 2 + k_y - k_eps) / n)


def total_spike_covariance(
    v_cond: np.ndarray, gamma_sig: np.ndarray, spikes: SpikeSet
) -> np.ndarray:
    """V̂_* = V̂^cond + N · diag(θ′) Γ̂^sig diag(θ′)."""
    tp = spikes.theta_prime
    return _symmetrize(v_cond + spikes.n_samples * np.outer(tp, tp) * gamma_sig)


def profile_jacobian(d2_hat: np.ndarray) -> np.ndarray:
    """J_{kj} = (δ_{kj} s - d²_k) / s² with s = Σ d²."""
    d2 = np.asarray(d2_hat, dtype=float)
    s = d2.sum()
    return (np.eye(d2.size) * s - d2[:, None]) / s ** 2


def strength_derivatives(spikes: SpikeSet, sigma: np.ndarray) -> np.ndarray:
    """
    Delta-method factors Γ_j = s₂(ξ_j) / (p g(ξ_j)² θ′_j).

    Raises:
        NearCriticalSpike: If some θ′_j is below the near-critical guard
    """
    p = len(sigma)
    out = np.empty(spikes.r)
    for j, (xi, tp) in enumerate(zip(spikes.xi_hat, spikes.theta_prime)):
        if tp < config.NEAR_CRITICAL_THETA_PRIME:
            raise NearCriticalSpike(j + 1, detail=f"theta'={tp:.3g}")
        out[j] = s2_fn(sigma, xi) / (p * g_fn(sigma, xi) ** 2 * tp)
    return out


def profile_covariance(
    spikes: SpikeSet,
    v_star: np.ndarray,
    noise: NoiseModel,
    v_cond: Optional[np.ndarray] = None,
    gamma_sig: Optional[np.ndarray] = None,
) -> CovarianceEstimates:
    """
    Propagate V̂_* to the signal strengths and the spectral profile.

    Σ̂_{d²} = Γ̂ V̂_* Γ̂, Σ̂_Π = J Σ̂_{d²} Jᵀ, V̂_Π = Σ̂_Π / N.

    Raises:
        NearCriticalSpike: If some θ′_j is below the near-critical guard
    """
    gamma = strength_derivatives(spikes, noise.sigma)
    sigma_d2 = _symmetrize(gamma[:, None] * v_star * gamma[None, :])
    J = profile_jacobian(spikes.d2_hat)
    sigma_pi = _symmetrize(J @ sigma_d2 @ J.T)
    r = spikes.r
    return CovarianceEstimates(
        v_cond=np.zeros((r, r)) if v_cond is None else v_cond,
        gamma_sig=np.zeros((r, r)) if gamma_sig is None else gamma_sig,
        v_star=v_star,
        sigma_d2=sigma_d2,
        sigma_pi=sigma_pi,
        v_pi=sigma_pi / spikes.n_samples,
        n_samples=spikes.n_samples,
    )


def estimate_covariances(Y: DataMatrix, spikes: SpikeSet, noise: NoiseModel) -> CovarianceEstimates:
    """Compose the conditional, signal-sampling and delta-method plug-ins."""
    eigvecs = spikes.eigenvectors
    m_hat = signal_fit(eigvecs, spikes.d2_hat)
    v_cond = conditional_covariance(spikes, eigvecs, noise, m_hat)
    gamma_sig = signal_sampling_covariance(Y, eigvecs, noise, m_hat)
    v_star = total_spike_covariance(v_cond, gamma_sig, spikes)
    return profile_covariance(spikes, v_star, noise, v_cond=v_cond, gamma_sig=gamma_sig)


def normal_quantile(alpha: float) -> float:
    """z_{1-α/2} of the standard normal."""
    if not 0 < alpha < 1:
        raise InvalidInput(f"alpha must lie in (0, 1), got {alpha}")
    return float(norm.ppf(1 - alpha / 2))


def _componentwise(center: np.ndarray, cov: np.ndarray, z: float):
    half = z * np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return [(float(c - h), float(c + h)) for c, h in zip(center, half)]


def nmsd_interval(delta: np.ndarray, v_delta: np.ndarray, z: float) -> tuple:
    """
    Interval d̂ ± z sqrt(ΔᵀV_ΔΔ / d̂²) for the distance.

    Raises:
        DegenerateDistance: If d̂ is below the degeneracy threshold
    """
    d_hat = float(np.linalg.norm(delta))
    if d_hat < config.DEGENERATE_DISTANCE:
        raise DegenerateDistance(f"Estimated distance {d_hat:.3g} is too small for an interval")
    var = max(float(delta @ v_delta @ delta), 0.0) / d_hat ** 2
    half = z * np.sqrt(var)
    return (d_hat - half, d_hat + half)


def confidence_intervals(
    pi1: SpectralProfile,
    cov1: CovarianceEstimates,
    alpha: float = config.DEFAULT_ALPHA,
    pi2: Optional[SpectralProfile] = None,
    cov2: Optional[CovarianceEstimates] = None,
) -> IntervalSet:
    """
    Componentwise and distance intervals at level 1 - alpha.

    With one profile only the profile components are covered. With two, the
    difference components and the distance are added; a distance too close to
    zero suppresses its interval and sets the degenerate flag.
    """
    z = normal_quantile(alpha)
    intervals = IntervalSet(alpha=alpha, z=z, profile=_componentwise(pi1.pi, cov1.v_pi, z))
    if pi2 is None or cov2 is None:
        return intervals
    if pi1.r != pi2.r:
        raise InvalidInput(f"Profiles have different ranks: {pi1.r} and {pi2.r}")

    delta = pi1.pi - pi2.pi
    v_delta = cov1.v_pi + cov2.v_pi
    intervals.profile_2 = _componentwise(pi2.pi, cov2.v_pi, z)
    intervals.delta = _componentwise(delta, v_delta, z)
    try:
        intervals.nmsd_interval = nmsd_interval(delta, v_delta, z)
    except DegenerateDistance as e:
        logger.info("%s; interval suppressed", e)
        intervals.nmsd_degenerate = True
    return intervals
