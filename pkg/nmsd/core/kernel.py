"""
Kernelized spectral profiles.

Profiles are read directly from the leading eigenvalues of the centered Gram
matrix divided by N; no noise correction is applied in feature space.
"""

import logging
from typing import List, Optional

import numpy as np
import scipy.linalg
from scipy.spatial.distance import pdist, squareform

from nmsd import config
from nmsd.core.errors import InsufficientSpectrum, InvalidInput
from nmsd.core.spikes import nmsd, profile
from nmsd.models.data import DataMatrix, GramMatrix
from nmsd.models.results import SpectralProfile

logger = logging.getLogger(__name__)


def center_gram(K: GramMatrix) -> GramMatrix:
    """Double-center a Gram matrix: HKH with H = I - 11ᵀ/N."""
    values = K.values
    row = values.mean(axis=1, keepdims=True)
    col = values.mean(axis=0, keepdims=True)
    centered = values - row - col + values.mean()
    return GramMatrix(0.5 * (centered + centered.T))


def linear_gram(X: DataMatrix) -> GramMatrix:
    """Gram matrix XᵀX of the sample columns."""
    return GramMatrix(X.values.T @ X.values)


def rbf_gram(X: DataMatrix, bandwidth: float) -> GramMatrix:
    """
    Gaussian kernel exp(-‖x_i - x_j‖² / (2 h²)) between sample columns.

    Raises:
        InvalidInput: If bandwidth is not positive
    """
    if not bandwidth > 0:
        raise InvalidInput(f"Bandwidth must be positive, got {bandwidth}")
    sq = squareform(pdist(X.values.T, metric="sqeuclidean")) if X.n > 1 else np.zeros((1, 1))
    return GramMatrix(np.exp(-sq / (2.0 * bandwidth ** 2)))


def median_bandwidth(X: DataMatrix) -> float:
    """Median pairwise distance between sample columns."""
    if X.n < 2:
        raise InvalidInput("Median bandwidth needs at least two samples")
    distances = pdist(X.values.T)
    median = float(np.median(distances))
    if median <= 0:
        raise InvalidInput("All samples coincide; cannot choose a bandwidth")
    return median


def kernel_profile(
    K: GramMatrix, r: int, warnings: Optional[List[str]] = None
) -> SpectralProfile:
    """
    Normalized top-r eigenvalues of the centered Gram matrix over N.

    A warning is recorded when the gap between the r-th and (r+1)-th
    eigenvalues is small relative to the leading one.

    Raises:
        InsufficientSpectrum: If fewer than r eigenvalues are positive
    """
    if r < 1:
        raise InvalidInput(f"Rank must be positive, got {r}")
    G = center_gram(K).values / K.n
    values = scipy.linalg.eigvalsh(G)[::-1]
    if r > values.size:
        raise InsufficientSpectrum(f"Requested rank {r} exceeds Gram size {values.size}")

    tol = 1e-10 * max(float(values[0]), 0.0)
    top = values[:r]
    if values[0] <= 0 or top[-1] <= tol:
        positive = int(np.sum(values > tol)) if values[0] > 0 else 0
        raise InsufficientSpectrum(f"Only {positive} positive eigenvalues, rank {r} requested")

    if r < values.size:
        gap = top[-1] - values[r]
        if gap < config.KERNEL_GAP_RATIO * values[0]:
            message = (
                f"Kernel eigenvalues {r} and {r + 1} are nearly tied "
                f"(gap {gap:.3g}); the profile may be unstable"
            )
            logger.warning(message)
            if warnings is not None:
                warnings.append(message)
    return profile(top)


def kernel_nmsd(
    K1: GramMatrix, K2: GramMatrix, r: int, warnings: Optional[List[str]] = None
) -> float:
    """Distance between the kernel spectral profiles of two Gram matrices."""
    return nmsd(kernel_profile(K1, r, warnings), kernel_profile(K2, r, warnings))
