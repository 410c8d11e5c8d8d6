"""
Dense linear-algebra primitives.

Covariance construction, symmetric eigendecomposition with a fixed sign
convention, tolerance-ranked pseudoinverse and seeded orthonormal frames.
"""

from typing import Union

import numpy as np
import scipy.linalg

from nmsd import config
from nmsd.core.errors import InvalidInput, NumericalFailure
from nmsd.models.data import DataMatrix, EigenSystem

SeedLike = Union[int, np.random.SeedSequence]


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Build a PCG64 generator from an integer seed or a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def derive_seed(master: SeedLike, *keys: int) -> np.random.SeedSequence:
    """
    Derive a child seed deterministically from a master seed and integer keys.

    Distinct key tuples give independent, pairwise distinct streams.
    """
    if isinstance(master, np.random.SeedSequence):
        entropy = master.entropy
        base_keys = tuple(master.spawn_key)
    else:
        entropy = int(master)
        base_keys = ()
    return np.random.SeedSequence(entropy, spawn_key=base_keys + tuple(int(k) for k in keys))


def sample_covariance(Y: DataMatrix, center: bool = False) -> np.ndarray:
    """
    Compute YYᵀ/N, optionally after removing column means.

    Args:
        Y: Data matrix (p×N)
        center: Remove the per-feature mean before forming the product

    Returns:
        Symmetric p×p matrix

    Raises:
        InvalidInput: If centering is requested with fewer than two samples
    """
    values = Y.values
    if center:
        if Y.n < 2:
            raise InvalidInput("Centering requires at least two samples")
        values = values - values.mean(axis=1, keepdims=True)
    Q = values @ values.T / Y.n
    return 0.5 * (Q + Q.T)


def sym_eig(Q: np.ndarray) -> EigenSystem:
    """
    Full eigendecomposition of a symmetric matrix, eigenvalues non-increasing.

    Each eigenvector is flipped so its first nonzero coordinate is positive.

    Raises:
        InvalidInput: If Q is not square or not symmetric within tolerance
        NumericalFailure: If the decomposition does not converge
    """
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.size == 0:
        raise InvalidInput(f"Expected a non-empty square matrix, got shape {Q.shape}")
    if not np.all(np.isfinite(Q)):
        raise InvalidInput("Matrix contains NaN or infinite entries")
    scale = max(1.0, float(np.max(np.abs(Q))))
    if np.max(np.abs(Q - Q.T)) > config.SYMMETRY_TOL * scale:
        raise InvalidInput("Matrix is not symmetric")

    try:
        values, vectors = scipy.linalg.eigh(0.5 * (Q + Q.T))
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalFailure(f"Eigendecomposition failed: {e}")

    # eigh returns ascending order; the stable reversal keeps tie order deterministic
    values = values[::-1].copy()
    vectors = vectors[:, ::-1].copy()
    _fix_signs(vectors)
    return EigenSystem(eigenvalues=values, eigenvectors=vectors)


def _fix_signs(vectors: np.ndarray, tol: float = 1e-12) -> None:
    """Flip columns in place so the first nonzero coordinate is positive."""
    nonzero = np.abs(vectors) > tol
    first = np.argmax(nonzero, axis=0)
    signs = np.sign(vectors[first, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    vectors *= signs


def pseudoinverse(A: np.ndarray, rank_tol: float = config.RANK_TOL) -> np.ndarray:
    """
    Moore–Penrose inverse of a symmetric PSD matrix by spectral truncation.

    Eigenvalues below rank_tol × λ_max are treated as zero.
    """
    if rank_tol <= 0:
        raise InvalidInput("rank_tol must be positive")
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if not np.any(A):
        return np.zeros_like(A)
    eig = sym_eig(A)
    lam_max = eig.eigenvalues[0]
    if lam_max <= 0:
        return np.zeros_like(A)
    keep = eig.eigenvalues > rank_tol * lam_max
    U = eig.eigenvectors[:, keep]
    inv = (U / eig.eigenvalues[keep]) @ U.T
    return 0.5 * (inv + inv.T)


def numerical_rank(A: np.ndarray, rank_tol: float = 1e-8) -> int:
    """Count eigenvalues of a symmetric PSD matrix above rank_tol × λ_max."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    values = scipy.linalg.eigvalsh(0.5 * (A + A.T))
    lam_max = values.max()
    if lam_max <= 0:
        return 0
    return int(np.sum(values > rank_tol * lam_max))


def random_orthonormal(p: int, r: int, seed: SeedLike) -> np.ndarray:
    """
    Draw a p×r matrix with orthonormal columns from the Haar measure.

    QR of a standard Gaussian matrix, with column signs fixed by diag(R) > 0.

    Raises:
        InvalidInput: If r is not in [1, p]
    """
    if not 1 <= r <= p:
        raise InvalidInput(f"Need 1 <= r <= p, got r={r}, p={p}")
    G = make_rng(seed).standard_normal((p, r))
    U, R = np.linalg.qr(G)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return U * signs


def signal_fit(eigenvectors: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Rank-r fit U diag(values) Uᵀ; with the signal strengths d̂² this is M̂."""
    return (eigenvectors * values) @ eigenvectors.T


def delocalization_diagnostic(vectors: np.ndarray) -> np.ndarray:
    """
    Largest absolute coordinate of each unit column, scaled by sqrt(p).

    Delocalized vectors stay near sqrt(2 log p); localized ones approach sqrt(p).
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    return np.sqrt(vectors.shape[0]) * np.max(np.abs(vectors), axis=0)
