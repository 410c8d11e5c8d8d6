"""Data models for the simulation harness."""

from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from nmsd import config
from nmsd.core.errors import ConfigError
from nmsd.models.results import to_builtin


@dataclass
class SimConfig:
    """
    Design of a simulation experiment.

    Two datasets share a random orthonormal frame V; dataset i has latent columns
    on the ellipsoid with semi-axes d_i and four-block diagonal noise with
    levels noise_levels_i.

    Attributes:
        p: Number of features
        n1: Sample count of dataset 1
        n2: Sample count of dataset 2
        r: Working rank (and latent dimension)
        d1: Semi-axes of dataset 1
        d2: Semi-axes of dataset 2
        noise_levels_1: Noise variance of each block for dataset 1
        noise_levels_2: Noise variance of each block for dataset 2
        block_fractions: Leading block fractions; the last block takes the remainder
        c_penalty: Potts penalty constant
        alpha: Test level
        n_rep: Number of Monte Carlo trials
        master_seed: Seed every trial seed derives from
        n_pilot: Trials used to estimate V_Δ for the theoretical power
        center: Center features before forming sample covariances
        workers: Threads used to run trials
    """
    p: int = 100
    n1: int = 1500
    n2: int = 1500
    r: int = 3
    d1: Tuple[float, ...] = (7.0, 6.0, 5.0)
    d2: Tuple[float, ...] = (7.0, 6.0, 5.0)
    noise_levels_1: Tuple[float, ...] = (3.0, 4.0, 5.0, 6.0)
    noise_levels_2: Tuple[float, ...] = (2.5, 3.0, 6.0, 4.5)
    block_fractions: Tuple[float, ...] = (1 / 3, 1 / 6, 1 / 6)
    c_penalty: float = config.DEFAULT_PENALTY_C
    alpha: float = config.DEFAULT_ALPHA
    n_rep: int = 800
    master_seed: int = config.DEFAULT_SEED
    n_pilot: int = 50
    center: bool = False
    workers: int = config.DEFAULT_WORKERS

    def __post_init__(self):
        for name in ("d1", "d2", "noise_levels_1", "noise_levels_2", "block_fractions"):
            value = getattr(self, name)
            if np.isscalar(value):
                value = (value,)
            setattr(self, name, tuple(float(v) for v in value))
        self.validate()

    def validate(self) -> None:
        """
        Check the design for consistency.

        Raises:
            ConfigError: If any field is out of range
        """
        if self.p < 2 or self.n1 < 2 or self.n2 < 2:
            raise ConfigError("p, n1 and n2 must all be at least 2")
        if not 1 <= self.r < self.p:
            raise ConfigError(f"Rank must satisfy 1 <= r < p, got r={self.r}")
        for name in ("d1", "d2"):
            axes = getattr(self, name)
            if len(axes) != self.r or min(axes) <= 0:
                raise ConfigError(f"{name} must hold {self.r} positive semi-axes")
        for name in ("noise_levels_1", "noise_levels_2"):
            levels = getattr(self, name)
            if len(levels) != len(self.block_fractions) + 1 or min(levels) <= 0:
                raise ConfigError(
                    f"{name} must hold {len(self.block_fractions) + 1} positive levels"
                )
        if min(self.block_fractions, default=1) <= 0 or sum(self.block_fractions) >= 1:
            raise ConfigError("Block fractions must be positive and sum to less than 1")
        if self.c_penalty <= 0:
            raise ConfigError("c_penalty must be positive")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.n_rep < 0 or self.n_pilot < 0:
            raise ConfigError("n_rep and n_pilot must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    @property
    def block_sizes(self) -> List[int]:
        """floor(p·f) for each leading fraction; the remainder goes last."""
        sizes = [int(np.floor(self.p * f)) for f in self.block_fractions]
        sizes.append(self.p - sum(sizes))
        return sizes

    @property
    def n_eff(self) -> float:
        return self.n1 * self.n2 / (self.n1 + self.n2)

    def semi_axes(self, which: int) -> np.ndarray:
        return np.array(self.d1 if which == 1 else self.d2)

    def noise_levels(self, which: int) -> Tuple[float, ...]:
        return self.noise_levels_1 if which == 1 else self.noise_levels_2

    def n_samples(self, which: int) -> int:
        return self.n1 if which == 1 else self.n2

    def replace(self, **changes: Any) -> "SimConfig":
        """Return a copy with some fields changed."""
        values = asdict(self)
        values.update(changes)
        return SimConfig(**values)

    @classmethod
    def from_dict(cls, values: Dict[str, Any], base: Optional["SimConfig"] = None) -> "SimConfig":
        """
        Build a config from raw key/value pairs on top of base (or the defaults).

        Raises:
            ConfigError: On unknown keys or invalid values
        """
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
        merged = asdict(base or cls())
        merged.update(values)
        try:
            return cls(**merged)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid config value: {e}")

    def to_dict(self) -> dict:
        return to_builtin(asdict(self))


@dataclass
class CalibrationReport:
    """
    Null calibration of the alignability test.

    Attributes:
        n_rep: Requested trials
        n_failed: Trials that raised a spike error
        alpha: Test level
        empirical_size: Share of completed trials rejecting at alpha
        quantile_levels: Levels q of the reported quantiles
        empirical_quantiles: Empirical T quantiles
        chi2_quantiles: Matching chi-square quantiles
        ks_statistic: Kolmogorov–Smirnov distance to chi-square(r - 1)
        ks_pvalue: p-value of the KS test
        t_stats: Statistics of the completed trials in trial order
    """
    n_rep: int
    n_failed: int
    alpha: float
    df: int
    empirical_size: Optional[float] = None
    quantile_levels: List[float] = field(default_factory=list)
    empirical_quantiles: List[float] = field(default_factory=list)
    chi2_quantiles: List[float] = field(default_factory=list)
    ks_statistic: Optional[float] = None
    ks_pvalue: Optional[float] = None
    t_stats: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("t_stats")
        return to_builtin(out)

    def to_rows(self) -> List[Dict[str, Any]]:
        """Quantile table: one row per level with empirical, chi-square and difference."""
        return [
            {
                "q": q,
                "empirical": emp,
                "chi2": th,
                "diff": emp - th,
            }
            for q, emp, th in zip(self.quantile_levels, self.empirical_quantiles, self.chi2_quantiles)
        ]


@dataclass
class PowerRow:
    """One line of a power sweep."""
    c: float
    delta_norm: float
    lambda_theory: Optional[float]
    power_theory: Optional[float]
    power_empirical: Optional[float]
    n_failed: int = 0

    def to_dict(self) -> dict:
        return to_builtin(asdict(self))


@dataclass
class PowerReport:
    """Power of the alignability test across anisotropy factors."""
    alpha: float
    n_rep: int
    rows: List[PowerRow] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "n_rep": self.n_rep,
            "rows": [row.to_dict() for row in self.rows],
        }

    def to_rows(self) -> List[Dict[str, Any]]:
        return [row.to_dict() for row in self.rows]


@dataclass
class NoiseRateReport:
    """Noise-estimation error (1/p)‖σ̂ - σ‖² as the sample size grows."""
    n_values: List[int]
    mean_errors: List[float]
    slope: Optional[float]

    def to_dict(self) -> dict:
        return to_builtin(asdict(self))

    def to_rows(self) -> List[Dict[str, Any]]:
        return [{"N": n, "mean_error": e} for n, e in zip(self.n_values, self.mean_errors)]


@dataclass
class VarianceCheckReport:
    """Empirical spread of λ̂₁ and Π̂ against mean plug-in predictions."""
    n_rep: int
    n_failed: int
    var_lambda1_empirical: float
    var_lambda1_plugin: float
    cov_pi_empirical: np.ndarray
    cov_pi_plugin: np.ndarray

    @property
    def lambda_ratio(self) -> float:
        return self.var_lambda1_empirical / self.var_lambda1_plugin

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lambda_ratio"] = self.lambda_ratio
        return to_builtin(out)

    def to_rows(self) -> List[Dict[str, Any]]:
        r = self.cov_pi_plugin.shape[0]
        rows = [{
            "quantity": "var_lambda1",
            "empirical": self.var_lambda1_empirical,
            "plugin": self.var_lambda1_plugin,
        }]
        for k in range(r):
            for j in range(k, r):
                rows.append({
                    "quantity": f"cov_pi[{k + 1},{j + 1}]",
                    "empirical": float(self.cov_pi_empirical[k, j]),
                    "plugin": float(self.cov_pi_plugin[k, j]),
                })
        return rows
