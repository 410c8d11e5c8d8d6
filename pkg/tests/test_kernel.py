"""Tests for kernel spectral profiles."""

import numpy as np
import pytest

from nmsd.core.errors import InsufficientSpectrum, InvalidInput
from nmsd.core.kernel import (
    center_gram,
    kernel_nmsd,
    kernel_profile,
    linear_gram,
    median_bandwidth,
    rbf_gram,
)
from nmsd.core.linalg import random_orthonormal, sample_covariance, sym_eig
from nmsd.core.spikes import profile
from nmsd.models.data import DataMatrix, GramMatrix


def noiseless_dataset(rng, p=12, n=60, axes=(5.0, 3.0, 2.0)):
    V = random_orthonormal(p, len(axes), seed=int(rng.integers(1 << 31)))
    latent = np.asarray(axes)[:, None] * rng.standard_normal((len(axes), n))
    return DataMatrix(V @ latent)


class TestGram:
    """Tests for Gram construction and centering."""

    def test_center_gram_rows_sum_to_zero(self, rng):
        """Test that double centering zeroes row and column sums."""
        X = DataMatrix(rng.standard_normal((4, 9)))
        K = center_gram(linear_gram(X)).values
        np.testing.assert_allclose(K.sum(axis=0), 0.0, atol=1e-10)
        np.testing.assert_allclose(K.sum(axis=1), 0.0, atol=1e-10)

    def test_rbf_diagonal(self, rng):
        """Test that the Gaussian kernel has unit diagonal and entries in (0, 1]."""
        K = rbf_gram(DataMatrix(rng.standard_normal((3, 8))), bandwidth=1.5).values
        np.testing.assert_allclose(np.diag(K), 1.0)
        assert np.all((K > 0) & (K <= 1))

    def test_rbf_bandwidth_must_be_positive(self, rng):
        """Test that a non-positive bandwidth is rejected."""
        with pytest.raises(InvalidInput):
            rbf_gram(DataMatrix(rng.standard_normal((3, 8))), bandwidth=0.0)

    def test_median_bandwidth(self):
        """Test the median pairwise distance on three collinear points."""
        X = DataMatrix(np.array([[0.0, 1.0, 3.0]]))
        # distances 1, 3, 2
        assert median_bandwidth(X) == pytest.approx(2.0)

    def test_rejects_asymmetric_gram(self):
        """Test that an asymmetric Gram matrix is rejected."""
        with pytest.raises(InvalidInput):
            GramMatrix(np.array([[1.0, 0.5], [0.0, 1.0]]))


class TestKernelProfile:
    """Tests for kernel profiles and distances."""

    def test_linear_kernel_matches_covariance_profile(self, rng):
        """Test that the linear-kernel profile equals the centered covariance profile."""
        for _ in range(50):
            X = noiseless_dataset(rng)
            from_kernel = kernel_profile(linear_gram(X), 3).pi
            top = sym_eig(sample_covariance(X, center=True)).eigenvalues[:3]
            np.testing.assert_allclose(from_kernel, profile(top).pi, atol=1e-8)

    def test_rescaling_invariance(self, rng):
        """Test that multiplying a Gram matrix by a constant leaves the distance unchanged."""
        K1 = linear_gram(noiseless_dataset(rng))
        K2 = linear_gram(noiseless_dataset(rng, axes=(4.0, 4.0, 1.0)))
        base = kernel_nmsd(K1, K2, 3)
        for factor in (1e-3, 7.5, 1e4):
            assert kernel_nmsd(K1.scaled(factor), K2, 3) == pytest.approx(base, abs=1e-12)

    def test_insufficient_spectrum(self, rng):
        """Test that rank beyond the Gram rank is rejected."""
        X = noiseless_dataset(rng, axes=(5.0, 3.0))
        with pytest.raises(InsufficientSpectrum):
            kernel_profile(linear_gram(X), 3)

    def test_rank_beyond_size(self):
        """Test that rank beyond N is rejected."""
        with pytest.raises(InsufficientSpectrum):
            kernel_profile(GramMatrix(np.eye(2)), 3)

    def test_gap_warning(self):
        """Test that tied eigenvalues at the cut produce a warning."""
        X = DataMatrix(np.array([[1.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, -1.0]]))
        warnings = []
        pi = kernel_profile(linear_gram(X), 1, warnings)
        np.testing.assert_allclose(pi.pi, [1.0])
        assert len(warnings) == 1
        assert "nearly tied" in warnings[0]

    def test_identical_grams(self, rng):
        """Test that a Gram matrix is at distance zero from itself."""
        K = rbf_gram(noiseless_dataset(rng), bandwidth=5.0)
        assert kernel_nmsd(K, K, 2) == 0.0
