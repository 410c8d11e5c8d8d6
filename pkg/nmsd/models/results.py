"""Data models for estimation results and reports."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np


def to_builtin(value: Any) -> Any:
    """Convert numpy scalars and arrays (possibly nested) to JSON-ready values."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {k: to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    return value


@dataclass
class NoiseModel:
    """
    Piecewise-constant diagonal noise covariance estimate.

    Attributes:
        sigma: Per-feature noise variance, length p
        boundaries: Start index of each segment, first element 0
        kappa3: Estimated third standardized cumulant of the noise
        kappa4: Estimated excess kurtosis of the noise
        penalty_beta: Potts penalty used for segmentation
        raw: Residual diagonal before segmentation
        rank: Working rank used for the low-rank fit
    """
    sigma: np.ndarray
    boundaries: List[int]
    kappa3: float
    kappa4: float
    penalty_beta: float
    raw: Optional[np.ndarray] = None
    rank: int = 0

    @property
    def p(self) -> int:
        return len(self.sigma)

    @property
    def n_segments(self) -> int:
        return len(self.boundaries)

    @property
    def levels(self) -> np.ndarray:
        """Noise level of each segment."""
        return self.sigma[self.boundaries]

    def scaled(self, factor: float) -> "NoiseModel":
        """Return the model for data scaled by sqrt(factor)."""
        return NoiseModel(
            sigma=self.sigma * factor,
            boundaries=list(self.boundaries),
            kappa3=self.kappa3,
            kappa4=self.kappa4,
            penalty_beta=self.penalty_beta * factor ** 2,
            raw=None if self.raw is None else self.raw * factor,
            rank=self.rank,
        )

    def to_dict(self) -> dict:
        """Convert noise model to dictionary."""
        return {
            "boundaries": list(self.boundaries),
            "levels": to_builtin(self.levels),
            "sigma": to_builtin(self.sigma),
            "kappa3": float(self.kappa3),
            "kappa4": float(self.kappa4),
            "penalty_beta": float(self.penalty_beta),
            "rank": self.rank,
        }


@dataclass
class SpectralProfile:
    """
    A point on the probability simplex: normalized top-r principal variances.

    Attributes:
        pi: Non-negative weights summing to one
    """
    pi: np.ndarray

    @property
    def r(self) -> int:
        return len(self.pi)

    def to_dict(self) -> dict:
        return {"r": self.r, "pi": to_builtin(self.pi)}


@dataclass
class SpikeSet:
    """
    Outlier eigenvalues of one dataset and the quantities inverted from them.

    Attributes:
        lam: Top-r sample eigenvalues, non-increasing
        xi_hat: Inverted conditional population spikes
        theta_prime: Outlier-map derivative at each xi_hat
        d2_hat: Estimated signal strengths
        eigenvectors: Sample eigenvectors paired with lam, shape (p, r)
        n_samples: Sample count N of the dataset
        threshold: Smallest sample eigenvalue that still inverts (θ at the critical point)
    """
    lam: np.ndarray
    xi_hat: np.ndarray
    theta_prime: np.ndarray
    d2_hat: np.ndarray
    eigenvectors: np.ndarray
    n_samples: int
    threshold: float = 0.0

    @property
    def r(self) -> int:
        return len(self.lam)

    @property
    def p(self) -> int:
        return self.eigenvectors.shape[0]

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "lambda": to_builtin(self.lam),
            "xi_hat": to_builtin(self.xi_hat),
            "theta_prime": to_builtin(self.theta_prime),
            "d2_hat": to_builtin(self.d2_hat),
            "supercritical_threshold": float(self.threshold),
        }


@dataclass
class CovarianceEstimates:
    """
    Plug-in asymptotic covariances of spikes, signal strengths and profile.

    Attributes:
        v_cond: Conditional noise block
        gamma_sig: Signal-sampling block (already carries 1/N)
        v_star: Total covariance of sqrt(N)(lambda - theta(xi))
        sigma_d2: Covariance of sqrt(N)(d2_hat - d2)
        sigma_pi: Covariance of sqrt(N)(pi_hat - pi)
        v_pi: sigma_pi / N
        n_samples: Sample count N
    """
    v_cond: np.ndarray
    gamma_sig: np.ndarray
    v_star: np.ndarray
    sigma_d2: np.ndarray
    sigma_pi: np.ndarray
    v_pi: np.ndarray
    n_samples: int

    @property
    def lambda_covariance(self) -> np.ndarray:
        """Plug-in covariance of the sample spikes."""
        return self.v_star / self.n_samples

    @property
    def d2_covariance(self) -> np.ndarray:
        """Plug-in covariance of the signal strengths."""
        return self.sigma_d2 / self.n_samples

    def to_dict(self) -> dict:
        return {
            "v_cond": to_builtin(self.v_cond),
            "gamma_sig": to_builtin(self.gamma_sig),
            "v_star": to_builtin(self.v_star),
            "sigma_d2": to_builtin(self.sigma_d2),
            "sigma_pi": to_builtin(self.sigma_pi),
            "v_pi": to_builtin(self.v_pi),
        }


@dataclass
class IntervalSet:
    """
    Confidence intervals at level 1 - alpha.

    Attributes:
        alpha: Significance level
        z: Normal quantile used for the half-widths
        profile: Intervals for each component of the first profile
        profile_2: Intervals for each component of the second profile
        delta: Intervals for each component of the profile difference
        nmsd_interval: Interval for the distance, None when suppressed
        nmsd_degenerate: True when the distance was too small for an interval
    """
    alpha: float
    z: float
    profile: List[Tuple[float, float]] = field(default_factory=list)
    profile_2: List[Tuple[float, float]] = field(default_factory=list)
    delta: List[Tuple[float, float]] = field(default_factory=list)
    nmsd_interval: Optional[Tuple[float, float]] = None
    nmsd_degenerate: bool = False

    def to_dict(self) -> dict:
        out = {
            "alpha": self.alpha,
            "z": self.z,
            "profile": [list(iv) for iv in self.profile],
        }
        if self.profile_2:
            out["profile_2"] = [list(iv) for iv in self.profile_2]
        if self.delta:
            out["delta"] = [list(iv) for iv in self.delta]
            out["nmsd"] = None if self.nmsd_interval is None else list(self.nmsd_interval)
            out["nmsd_degenerate"] = self.nmsd_degenerate
        return to_builtin(out)


@dataclass
class ProfileEstimate:
    """
    Everything estimated from one dataset.

    Attributes:
        noise: Fitted noise model
        spikes: Inverted spikes
        profile: Estimated spectral profile
        covariances: Plug-in covariances, None when not requested
    """
    noise: NoiseModel
    spikes: SpikeSet
    profile: SpectralProfile
    covariances: Optional[CovarianceEstimates] = None

    def to_dict(self, include_sigma: bool = False) -> dict:
        noise = self.noise.to_dict()
        if not include_sigma:
            noise.pop("sigma")
        out = {
            "noise": noise,
            "spikes": self.spikes.to_dict(),
            "profile": to_builtin(self.profile.pi),
        }
        if self.covariances is not None:
            out["v_pi"] = to_builtin(self.covariances.v_pi)
        return out


@dataclass
class AlignmentReport:
    """
    Outcome of the two-sample alignability test.

    Attributes:
        t_stat: Test statistic
        df: Degrees of freedom (r - 1)
        p_value: Upper-tail chi-square probability of t_stat
        delta_pi: Difference of the two estimated profiles
        nmsd_hat: Euclidean norm of delta_pi
        n_eff: N1 N2 / (N1 + N2)
        intervals: Confidence intervals
        alpha: Test level
        estimates: Per-dataset estimates
        warnings: Diagnostic messages
    """
    t_stat: float
    df: int
    p_value: float
    delta_pi: np.ndarray
    nmsd_hat: float
    n_eff: float
    intervals: IntervalSet
    alpha: float
    estimates: List[ProfileEstimate] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def rejected(self) -> bool:
        return self.p_value < self.alpha

    def to_dict(self) -> dict:
        return to_builtin({
            "t_stat": self.t_stat,
            "df": self.df,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "rejected": self.rejected,
            "delta_pi": self.delta_pi,
            "nmsd_hat": self.nmsd_hat,
            "n_eff": self.n_eff,
            "intervals": self.intervals.to_dict(),
            "datasets": [est.to_dict() for est in self.estimates],
        })


@dataclass
class ReportEnvelope:
    """
    The JSON document every CLI command emits.

    Attributes:
        tool_version: Package version
        command: Subcommand name
        config_echo: Effective configuration
        results: Command-specific payload
        warnings: Diagnostic messages
    """
    tool_version: str
    command: str
    config_echo: Dict[str, Any]
    results: Any
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return to_builtin({
            "tool_version": self.tool_version,
            "command": self.command,
            "config_echo": self.config_echo,
            "results": self.results,
            "warnings": self.warnings,
        })
