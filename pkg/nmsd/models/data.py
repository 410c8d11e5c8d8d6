"""Data models for matrices entering the analysis."""

from dataclasses import dataclass

import numpy as np

from nmsd.core.errors import InvalidInput


@dataclass(frozen=True)
class DataMatrix:
    """
    A p×N matrix of observations, features as rows and samples as columns.

    Attributes:
        values: Real matrix of shape (p, N)
    """
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.size == 0:
            raise InvalidInput(f"Data matrix must be a non-empty 2-D array, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidInput("Data matrix contains NaN or infinite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def p(self) -> int:
        """Number of features."""
        return self.values.shape[0]

    @property
    def n(self) -> int:
        """Number of samples."""
        return self.values.shape[1]

    @property
    def shape(self) -> tuple:
        return self.values.shape

    def scaled(self, factor: float) -> "DataMatrix":
        """Return a copy with every entry multiplied by factor."""
        return DataMatrix(self.values * factor)

    def to_dict(self) -> dict:
        """Summarize the matrix (shape only; values are not echoed)."""
        return {"p": self.p, "N": self.n}


@dataclass(frozen=True)
class EigenSystem:
    """
    Full spectrum of a symmetric matrix.

    Attributes:
        eigenvalues: Eigenvalues sorted non-increasing
        eigenvectors: Orthonormal columns, column j paired with eigenvalue j
    """
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def top(self, r: int) -> "EigenSystem":
        """Return the leading r eigenpairs."""
        return EigenSystem(self.eigenvalues[:r], self.eigenvectors[:, :r])

    def reconstruct(self) -> np.ndarray:
        """Return U diag(λ) Uᵀ."""
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T


@dataclass(frozen=True)
class GramMatrix:
    """
    An N×N kernel Gram matrix.

    Attributes:
        values: Symmetric positive semidefinite matrix of shape (N, N)
    """
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1] or values.size == 0:
            raise InvalidInput(f"Gram matrix must be square and non-empty, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidInput("Gram matrix contains NaN or infinite entries")
        scale = max(1.0, float(np.max(np.abs(values))))
        if np.max(np.abs(values - values.T)) > 1e-10 * scale:
            raise InvalidInput("Gram matrix is not symmetric")
        values = 0.5 * (values + values.T)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def scaled(self, factor: float) -> "GramMatrix":
        """Return the Gram matrix of the kernel multiplied by factor."""
        return GramMatrix(self.values * factor)
