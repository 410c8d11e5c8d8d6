"""Tests for noise variance estimation."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nmsd.core.errors import DegenerateResiduals, InvalidInput
from nmsd.core.noise import (
    estimate_noise,
    penalty_beta,
    potts_objective,
    potts_segment,
    residual_cumulants,
    residual_diagonal,
)
from nmsd.models.data import DataMatrix
from nmsd.services.simulation_service import noise_vector


def brute_force_potts(x, beta):
    """Smallest Potts objective over every partition of x into contiguous segments."""
    x = np.asarray(x, dtype=float)
    p = x.size
    best = math.inf
    for cuts in itertools.product((False, True), repeat=p - 1):
        edges = [0] + [i + 1 for i, cut in enumerate(cuts) if cut] + [p]
        sse = sum(float(np.sum((x[a:b] - x[a:b].mean()) ** 2)) for a, b in zip(edges[:-1], edges[1:]))
        best = min(best, sse + beta * (len(edges) - 2))
    return best


class TestResidualDiagonal:
    """Tests for the rank-r residual diagonal."""

    def test_rank_zero_is_diagonal(self):
        """Test that r = 0 returns diag(Q)."""
        Q = np.array([[2.0, 0.5], [0.5, 3.0]])
        np.testing.assert_allclose(residual_diagonal(Q, 0), [2.0, 3.0])

    def test_removes_rank_one_part(self):
        """Test that an exact rank-one plus diagonal split is recovered when the spike dominates."""
        u = np.array([1.0, 0.0, 0.0])
        Q = 10.0 * np.outer(u, u) + np.diag([1.0, 2.0, 3.0])
        np.testing.assert_allclose(residual_diagonal(Q, 1), [1e-12, 2.0, 3.0], atol=1e-10)

    def test_rank_out_of_range(self):
        """Test that r >= p is rejected."""
        with pytest.raises(InvalidInput):
            residual_diagonal(np.eye(3), 3)


class TestPottsSegment:
    """Tests for the exact Potts segmentation."""

    def test_constant_sequence_single_segment(self):
        """Test that a constant sequence stays in one segment."""
        fit, boundaries = potts_segment(np.full(10, 2.5), beta=1.0)
        assert boundaries == [0]
        np.testing.assert_allclose(fit, 2.5)

    def test_finds_clear_step(self):
        """Test recovery of a single large step."""
        x = np.array([1.0, 1.1, 0.9, 1.0, 5.0, 5.1, 4.9, 5.0])
        fit, boundaries = potts_segment(x, beta=0.5)
        assert boundaries == [0, 4]
        np.testing.assert_allclose(fit[:4], 1.0)
        np.testing.assert_allclose(fit[4:], 5.0)

    def test_zero_penalty_interpolates(self):
        """Test that beta = 0 fits the data exactly."""
        x = np.array([3.0, 1.0, 4.0, 1.5, 5.0])
        fit, _ = potts_segment(x, beta=0.0)
        np.testing.assert_allclose(fit, x)

    def test_huge_penalty_single_segment(self):
        """Test that a prohibitive penalty yields the global mean."""
        x = np.array([0.0, 10.0, 0.0, 10.0])
        fit, boundaries = potts_segment(x, beta=1e6)
        assert boundaries == [0]
        np.testing.assert_allclose(fit, 5.0)

    def test_single_element(self):
        """Test a length-one sequence."""
        fit, boundaries = potts_segment(np.array([7.0]), beta=3.0)
        assert boundaries == [0]
        np.testing.assert_allclose(fit, [7.0])

    def test_tie_prefers_fewer_segments(self):
        """Test that an exact tie between one and two segments keeps one."""
        # one segment: SSE 2; two segments: SSE 0 + beta 2
        fit, boundaries = potts_segment(np.array([0.0, 2.0]), beta=2.0)
        assert boundaries == [0]
        np.testing.assert_allclose(fit, 1.0)

    def test_rejects_bad_input(self):
        """Test that empty input and negative penalties are rejected."""
        with pytest.raises(InvalidInput):
            potts_segment(np.array([]), beta=1.0)
        with pytest.raises(InvalidInput):
            potts_segment(np.array([1.0, 2.0]), beta=-1.0)

    @settings(max_examples=150, deadline=None)
    @given(
        st.lists(st.floats(min_value=-50, max_value=50, allow_nan=False), min_size=1, max_size=12),
        st.sampled_from([0.0, 0.1, 1.0, 10.0, 200.0]),
    )
    def test_matches_exhaustive_search(self, values, beta):
        """Test that the DP objective equals the exhaustive-search optimum."""
        x = np.array(values)
        fit, boundaries = potts_segment(x, beta)
        assert boundaries[0] == 0
        assert boundaries == sorted(set(boundaries))
        achieved = float(np.sum((x - fit) ** 2)) + beta * (len(boundaries) - 1)
        assert achieved == pytest.approx(brute_force_potts(x, beta), rel=1e-9, abs=1e-7)

    def test_monotone_in_penalty(self, rng):
        """Test that the optimal objective rises and the jump count falls as beta grows."""
        betas = [0.0, 0.01, 0.1, 0.5, 1.0, 5.0, 20.0, 100.0]
        for _ in range(5):
            x = np.repeat(rng.uniform(0, 6, size=4), 6) + 0.5 * rng.standard_normal(24)
            objectives, jumps = [], []
            for beta in betas:
                fit, boundaries = potts_segment(x, beta)
                objectives.append(potts_objective(x, fit, beta))
                jumps.append(len(boundaries) - 1)
            assert all(b >= a - 1e-9 for a, b in zip(objectives, objectives[1:]))
            assert all(b <= a for a, b in zip(jumps, jumps[1:]))

    def test_large_offset_keeps_small_step(self):
        """Test that a tiny step on a large level is still found."""
        x = np.array([1e6] * 5 + [1e6 + 1e-3] * 5)
        fit, boundaries = potts_segment(x, beta=1e-9)
        assert boundaries == [0, 5]
        assert potts_objective(x, fit, 1e-9) == pytest.approx(1e-9, abs=1e-12)

    def test_objective_counts_jumps(self):
        """Test potts_objective on a hand-checked fit."""
        x = np.array([1.0, 2.0, 5.0])
        fit = np.array([1.5, 1.5, 5.0])
        assert potts_objective(x, fit, beta=3.0) == pytest.approx(0.5 + 3.0)


class TestResidualCumulants:
    """Tests for the residual cumulant estimates."""

    def test_gaussian_residuals(self, rng):
        """Test that Gaussian noise gives cumulants near zero."""
        Y = DataMatrix(rng.standard_normal((20, 20000)))
        kappa3, kappa4 = residual_cumulants(Y, np.zeros((20, 0)))
        assert abs(kappa3) < 0.05
        assert abs(kappa4) < 0.1

    def test_uniform_residuals_platykurtic(self, rng):
        """Test the excess kurtosis of uniform noise (-1.2)."""
        Y = DataMatrix(rng.uniform(-1, 1, size=(20, 20000)))
        _, kappa4 = residual_cumulants(Y, np.zeros((20, 0)))
        assert kappa4 == pytest.approx(-1.2, abs=0.05)

    def test_rejects_non_orthonormal(self, rng):
        """Test that non-orthonormal directions are rejected."""
        Y = DataMatrix(rng.standard_normal((5, 30)))
        with pytest.raises(InvalidInput):
            residual_cumulants(Y, 2.0 * np.eye(5)[:, :1])

    def test_degenerate(self):
        """Test that all-zero residuals raise DegenerateResiduals."""
        with pytest.raises(DegenerateResiduals):
            residual_cumulants(DataMatrix(np.zeros((3, 10))), np.zeros((3, 0)))


class TestEstimateNoise:
    """Tests for the full noise estimator."""

    def test_penalty(self):
        """Test beta = c·log(p)/N."""
        assert penalty_beta(10.0, 100, 1500) == pytest.approx(10.0 * math.log(100) / 1500)

    def test_recovers_two_blocks(self, rng):
        """Test recovery of a two-level noise profile from pure noise."""
        sigma = np.repeat([1.0, 2.0], 20)
        Y = DataMatrix(np.sqrt(sigma)[:, None] * rng.standard_normal((40, 4000)))
        noise = estimate_noise(Y, r=0)
        assert 20 in noise.boundaries
        np.testing.assert_allclose(noise.sigma, sigma, atol=0.35)
        assert noise.rank == 0
        assert noise.raw.shape == (40,)

    def test_rejects_bad_penalty(self, rng):
        """Test that a non-positive penalty constant is rejected."""
        Y = DataMatrix(rng.standard_normal((5, 20)))
        with pytest.raises(InvalidInput):
            estimate_noise(Y, r=1, c=0.0)

    def test_sample_order_irrelevant(self, null_pair, small_cfg, rng):
        """Test that permuting the sample columns leaves the noise model unchanged."""
        Y = null_pair[0]
        shuffled = DataMatrix(Y.values[:, rng.permutation(Y.n)])
        before = estimate_noise(Y, r=small_cfg.r)
        after = estimate_noise(shuffled, r=small_cfg.r)
        assert after.boundaries == before.boundaries
        np.testing.assert_allclose(after.sigma, before.sigma, rtol=1e-9)
        assert after.kappa4 == pytest.approx(before.kappa4, rel=1e-9, abs=1e-12)

    def test_simulated_design(self, null_pair, small_cfg):
        """Test noise recovery on the small simulation design."""
        noise = estimate_noise(null_pair[0], r=small_cfg.r)
        truth = noise_vector(small_cfg.p, small_cfg.noise_levels_1, small_cfg.block_fractions)
        assert np.mean((noise.sigma - truth) ** 2) < 1.0
        assert np.all(noise.sigma > 0)
