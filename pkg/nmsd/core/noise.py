"""
Noise variance estimation.

A rank-r spectral truncation of the sample covariance leaves a residual diagonal
that concentrates around the noise variances; an exact one-dimensional Potts
segmentation along the feature order then pools it into blocks.
"""

import logging
import math
from typing import List, Tuple

import numpy as np

from nmsd import config
from nmsd.core.errors import DegenerateResiduals, InvalidInput
from nmsd.core.linalg import sample_covariance, sym_eig
from nmsd.models.data import DataMatrix
from nmsd.models.results import NoiseModel

logger = logging.getLogger(__name__)


def residual_diagonal(Q: np.ndarray, r: int) -> np.ndarray:
    """
    Diagonal of Q minus its best rank-r spectral fit.

    Args:
        Q: Symmetric p×p matrix
        r: Number of leading eigenpairs to remove, 0 <= r < p

    Returns:
        Residual diagonal, floored at the variance floor

    Raises:
        InvalidInput: If r is out of range
    """
    Q = np.asarray(Q, dtype=float)
    p = Q.shape[0]
    if not 0 <= r < p:
        raise InvalidInput(f"Rank must satisfy 0 <= r < p, got r={r}, p={p}")

    diag = np.diag(Q).copy()
    if r > 0:
        eig = sym_eig(Q).top(r)
        diag -= (eig.eigenvectors ** 2) @ eig.eigenvalues
    return np.maximum(diag, config.VARIANCE_FLOOR)


def potts_objective(x: np.ndarray, fit: np.ndarray, beta: float) -> float:
    """Squared error of fit plus beta per jump."""
    x = np.asarray(x, dtype=float)
    fit = np.asarray(fit, dtype=float)
    jumps = int(np.count_nonzero(fit[1:] != fit[:-1]))
    return float(np.sum((x - fit) ** 2) + beta * jumps)


def potts_segment(x: np.ndarray, beta: float) -> Tuple[np.ndarray, List[int]]:
    """
    Exact minimizer of sum (x_i - f_i)^2 + beta * #jumps(f) by dynamic programming.

    Interval costs come from prefix sums of x and x^2, giving O(p^2) time and
    O(p) memory. Ties go to fewer segments, then to earlier boundaries.

    Args:
        x: Sequence to segment, length p >= 1
        beta: Non-negative jump penalty

    Returns:
        Tuple of (piecewise-constant fit, segment start indices)
    """
    x = np.asarray(x, dtype=float).ravel()
    p = x.size
    if p == 0:
        raise InvalidInput("Cannot segment an empty sequence")
    if not np.all(np.isfinite(x)):
        raise InvalidInput("Sequence contains NaN or infinite entries")
    if beta < 0 or not math.isfinite(beta):
        raise InvalidInput(f"Penalty must be finite and non-negative, got {beta}")

    # shift-invariant costs; centering keeps the prefix sums well conditioned
    xc = x - x.mean()
    s1 = np.concatenate(([0.0], np.cumsum(xc)))
    s2 = np.concatenate(([0.0], np.cumsum(xc * xc)))
    eps = 4 * np.finfo(float).eps

    # best[j]: optimal cost of x[:j]; each segment pays beta, so best[0] = -beta
    best = np.empty(p + 1)
    best[0] = -beta
    segments = np.zeros(p + 1, dtype=int)
    last_start = np.zeros(p + 1, dtype=int)

    for j in range(1, p + 1):
        starts = np.arange(j)
        lengths = j - starts
        sums = s1[j] - s1[:j]
        cost = np.maximum(s2[j] - s2[:j] - sums * sums / lengths, 0.0)
        candidates = best[:j] + cost + beta
        lowest = candidates.min()
        tied = np.flatnonzero(candidates <= lowest + eps * max(1.0, abs(lowest)))
        counts = segments[tied]
        pick = tied[counts == counts.min()][0]
        best[j] = candidates[pick]
        segments[j] = segments[pick] + 1
        last_start[j] = pick

    boundaries = []
    end = p
    while end > 0:
        start = last_start[end]
        boundaries.append(int(start))
        end = start
    boundaries.reverse()

    fit = np.empty(p)
    edges = boundaries + [p]
    for start, stop in zip(edges[:-1], edges[1:]):
        fit[start:stop] = x[start:stop].mean()
    return fit, boundaries


def residual_cumulants(
    Y: DataMatrix, top_eigenvectors: np.ndarray, sigma: np.ndarray = None
) -> Tuple[float, float]:
    """
    Standardized third and fourth cumulants of the spike-projected residuals.

    Residuals are R = (I - ΨΨᵀ)Y. Per-coordinate moments are standardized and
    averaged over coordinates whose second moment exceeds the variance floor.

    Args:
        Y: Data matrix (p×N)
        top_eigenvectors: Orthonormal p×r spike directions (r may be 0)
        sigma: Noise variances (unused by the estimator; accepted for symmetry
            with the noise model)

    Returns:
        Tuple of (kappa3, kappa4)

    Raises:
        DegenerateResiduals: If every coordinate has vanishing residual variance
    """
    values = Y.values
    psi = np.asarray(top_eigenvectors, dtype=float).reshape(Y.p, -1)
    if psi.shape[1] > 0:
        gram = psi.T @ psi
        if not np.allclose(gram, np.eye(psi.shape[1]), atol=1e-8):
            raise InvalidInput("Spike directions must be orthonormal")
        residuals = values - psi @ (psi.T @ values)
    else:
        residuals = values

    m2 = np.mean(residuals ** 2, axis=1)
    keep = m2 >= config.VARIANCE_FLOOR
    if not np.any(keep):
        raise DegenerateResiduals("All residual coordinates have zero variance")
    skipped = int(np.count_nonzero(~keep))
    if skipped:
        logger.warning("Skipped %d degenerate residual coordinates", skipped)

    R = residuals[keep]
    m2 = m2[keep]
    m3 = np.mean(R ** 3, axis=1)
    m4 = np.mean(R ** 4, axis=1)
    kappa3 = float(np.mean(m3 / m2 ** 1.5))
    kappa4 = float(np.mean(m4 / m2 ** 2 - 3.0))
    return kappa3, kappa4


def penalty_beta(c: float, p: int, n: int) -> float:
    """Potts penalty c · log(p) / N (natural logarithm)."""
    return c * math.log(p) / n


def estimate_noise(
    Y: DataMatrix,
    r: int,
    c: float = config.DEFAULT_PENALTY_C,
    center: bool = False,
) -> NoiseModel:
    """
    Estimate the block-heteroskedastic noise variances of one dataset.

    Args:
        Y: Data matrix (p×N)
        r: Working rank removed before reading the residual diagonal
        c: Penalty constant; beta = c · log(p) / N
        center: Remove feature means before forming the sample covariance

    Returns:
        NoiseModel with segmented variances and residual cumulants

    Raises:
        InvalidInput: If the arguments violate the preconditions
    """
    if Y.p < 2 or Y.n < 2:
        raise InvalidInput(f"Need p >= 2 and N >= 2, got p={Y.p}, N={Y.n}")
    if c <= 0:
        raise InvalidInput(f"Penalty constant must be positive, got {c}")
    if r < 0:
        raise InvalidInput(f"Rank must be non-negative, got {r}")

    Q = sample_covariance(Y, center=center)
    raw = residual_diagonal(Q, r)
    beta = penalty_beta(c, Y.p, Y.n)
    fit, boundaries = potts_segment(raw, beta)
    sigma = np.maximum(fit, config.VARIANCE_FLOOR)

    top = sym_eig(Q).top(r).eigenvectors if r > 0 else np.zeros((Y.p, 0))
    data = Y
    if center:
        data = DataMatrix(Y.values - Y.values.mean(axis=1, keepdims=True))
    kappa3, kappa4 = residual_cumulants(data, top, sigma)

    logger.debug(
        "Noise fit: %d segments at %s, beta=%.4g, kappa3=%.3f, kappa4=%.3f",
        len(boundaries), boundaries, beta, kappa3, kappa4,
    )
    return NoiseModel(
        sigma=sigma,
        boundaries=boundaries,
        kappa3=kappa3,
        kappa4=kappa4,
        penalty_beta=beta,
        raw=raw,
        rank=r,
    )
