"""
Analysis service that orchestrates the estimation pipeline.

Coordinates noise estimation, spike inversion, plug-in covariances and the
two-sample alignability test.
"""

import logging
from typing import List, Optional

import numpy as np

from nmsd import config
from nmsd.core.alignability import chi2_sf, t_pi
from nmsd.core.errors import InvalidInput, SpikeError
from nmsd.core.linalg import numerical_rank
from nmsd.core.noise import estimate_noise
from nmsd.core.spikes import estimate_spikes, nmsd, profile
from nmsd.core.uncertainty import confidence_intervals, estimate_covariances
from nmsd.models.data import DataMatrix
from nmsd.models.results import AlignmentReport, IntervalSet, ProfileEstimate

logger = logging.getLogger(__name__)


class AnalysisService:
    """Service for estimating spectral profiles and comparing datasets."""

    @staticmethod
    def estimate_profile(
        Y: DataMatrix,
        r: int,
        c_penalty: float = config.DEFAULT_PENALTY_C,
        center: bool = False,
        with_covariance: bool = True,
        dataset: Optional[int] = None,
    ) -> ProfileEstimate:
        """
        Run noise estimation, spike inversion and (optionally) plug-in covariances.

        Args:
            Y: Data matrix (p×N)
            r: Working rank
            c_penalty: Potts penalty constant
            center: Center features before forming the sample covariance
            with_covariance: Also compute the plug-in covariances
            dataset: Index attached to spike errors

        Returns:
            ProfileEstimate for the dataset

        Raises:
            SubcriticalSpike, NearCriticalSpike: Tagged with the dataset index
        """
        if r < 1:
            raise InvalidInput(f"Rank must be at least 1, got {r}")
        try:
            noise = estimate_noise(Y, r, c_penalty, center=center)
            spikes = estimate_spikes(Y, noise, r, center=center)
            covariances = estimate_covariances(Y, spikes, noise) if with_covariance else None
        except SpikeError as e:
            if dataset is not None:
                raise e.with_dataset(dataset) from e
            raise
        return ProfileEstimate(
            noise=noise,
            spikes=spikes,
            profile=profile(spikes.d2_hat),
            covariances=covariances,
        )

    @staticmethod
    def distance(
        Y1: DataMatrix,
        Y2: DataMatrix,
        r: int,
        c_penalty: float = config.DEFAULT_PENALTY_C,
        center: bool = False,
    ) -> float:
        """Point estimate of the distance between two datasets' profiles."""
        first = AnalysisService.estimate_profile(Y1, r, c_penalty, center, False, dataset=1)
        second = AnalysisService.estimate_profile(Y2, r, c_penalty, center, False, dataset=2)
        return nmsd(first.profile, second.profile)

    @staticmethod
    def align_test(
        Y1: DataMatrix,
        Y2: DataMatrix,
        r: int,
        c_penalty: float = config.DEFAULT_PENALTY_C,
        alpha: float = config.DEFAULT_ALPHA,
        center: bool = False,
    ) -> AlignmentReport:
        """
        Test whether two datasets share the same spectral profile.

        Args:
            Y1: First data matrix
            Y2: Second data matrix (same feature count)
            r: Shared working rank
            c_penalty: Potts penalty constant
            alpha: Test level and interval level
            center: Center features before forming sample covariances

        Returns:
            AlignmentReport with statistic, p-value, difference and intervals
        """
        if Y1.p != Y2.p:
            raise InvalidInput(f"Datasets have different feature counts: {Y1.p} and {Y2.p}")

        estimates = [
            AnalysisService.estimate_profile(Y, r, c_penalty, center, True, dataset=i)
            for i, Y in enumerate((Y1, Y2), start=1)
        ]
        first, second = estimates
        v1 = first.covariances.v_pi
        v2 = second.covariances.v_pi

        warnings: List[str] = []
        df = r - 1
        if df < 1:
            message = "Rank 1 profiles are identical by construction; the test is trivial"
            logger.warning(message)
            warnings.append(message)
            stat, p_value = 0.0, 1.0
        else:
            rank = numerical_rank(v1 + v2)
            if rank != df:
                message = f"Numerical rank of V1 + V2 is {rank}, expected {df}"
                logger.warning(message)
                warnings.append(message)
            stat = t_pi(first.profile, second.profile, v1, v2)
            p_value = chi2_sf(stat, df)

        delta = first.profile.pi - second.profile.pi
        intervals = confidence_intervals(
            first.profile, first.covariances, alpha, second.profile, second.covariances
        )
        if intervals.nmsd_degenerate:
            warnings.append("Estimated distance is near zero; its interval was suppressed")

        report = AlignmentReport(
            t_stat=stat,
            df=df,
            p_value=p_value,
            delta_pi=delta,
            nmsd_hat=float(np.linalg.norm(delta)),
            n_eff=Y1.n * Y2.n / (Y1.n + Y2.n),
            intervals=intervals,
            alpha=alpha,
            estimates=estimates,
            warnings=warnings,
        )
        logger.debug("Alignment test: T=%.4f df=%d p=%.4g", stat, df, p_value)
        return report

    @staticmethod
    def profile_intervals(estimate: ProfileEstimate, alpha: float) -> IntervalSet:
        """Componentwise intervals for a single profile."""
        if estimate.covariances is None:
            raise InvalidInput("Profile was estimated without covariances")
        return confidence_intervals(estimate.profile, estimate.covariances, alpha)
