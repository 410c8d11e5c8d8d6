"""
Simulation service.

Generates ellipsoid-surface signals observed through four-block heteroskedastic
Gaussian noise and runs the Monte Carlo experiments: null calibration, power
sweep, noise-estimation rate and variance-formula checks.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import kstest

from nmsd.core.alignability import chi2_quantile, noncentral_chi2_power, noncentrality
from nmsd.core.errors import InvalidInput, SpikeError
from nmsd.core.linalg import SeedLike, derive_seed, make_rng, random_orthonormal
from nmsd.core.noise import estimate_noise
from nmsd.core.parser import write_matrix
from nmsd.core.spikes import population_profile
from nmsd.models.data import DataMatrix
from nmsd.models.simulation import (
    CalibrationReport,
    NoiseRateReport,
    PowerReport,
    PowerRow,
    SimConfig,
    VarianceCheckReport,
)
from nmsd.services.analysis_service import AnalysisService

logger = logging.getLogger(__name__)

QUANTILE_LEVELS = (0.01, 0.10, 0.25, 0.50, 0.75, 0.90, 0.99)
PILOT_STREAM = 1_000_003


def noise_vector(p: int, levels: Sequence[float], fractions: Sequence[float]) -> np.ndarray:
    """Piecewise-constant variance vector: floor(p·f) features per leading block."""
    sizes = [int(np.floor(p * f)) for f in fractions]
    sizes.append(p - sum(sizes))
    if len(levels) != len(sizes):
        raise InvalidInput(f"Need {len(sizes)} noise levels, got {len(levels)}")
    return np.repeat(np.asarray(levels, dtype=float), sizes)


def alternative_axes(d1: Sequence[float], c: float) -> Tuple[float, ...]:
    """Scale the first semi-axis by sqrt(c): D₂ = √diag(c, 1, …, 1)·D₁."""
    axes = np.asarray(d1, dtype=float).copy()
    axes[0] *= np.sqrt(c)
    return tuple(axes.tolist())


def population_delta(d1: Sequence[float], d2: Sequence[float]) -> float:
    """Population distance between the profiles of two ellipsoids."""
    return float(np.linalg.norm(population_profile(d1).pi - population_profile(d2).pi))


def trial_seeds(master_seed: SeedLike, n: int, *stream: int) -> List[np.random.SeedSequence]:
    """Per-trial seeds derived from the master seed (and an optional stream key)."""
    return [derive_seed(master_seed, *stream, i) for i in range(n)]


def generate_dataset(
    cfg: SimConfig, which: int, seed: SeedLike, include_noise: bool = True
) -> DataMatrix:
    """
    Draw one dataset of a trial.

    The frame V depends on the trial seed only, so both datasets of a trial share
    it; latent columns and noise come from a stream specific to `which`.

    Args:
        cfg: Simulation design
        which: 1 or 2
        seed: Trial seed
        include_noise: Add the heteroskedastic noise (False gives the signal alone)

    Returns:
        DataMatrix of shape (p, N_which)
    """
    if which not in (1, 2):
        raise InvalidInput(f"Dataset index must be 1 or 2, got {which}")
    V = random_orthonormal(cfg.p, cfg.r, derive_seed(seed, 0))
    rng = make_rng(derive_seed(seed, which))
    n = cfg.n_samples(which)

    directions = rng.standard_normal((cfg.r, n))
    directions /= np.linalg.norm(directions, axis=0, keepdims=True)
    latent = cfg.semi_axes(which)[:, None] * directions
    signal = np.sqrt(cfg.r) * V @ latent

    if not include_noise:
        return DataMatrix(signal)
    sigma = noise_vector(cfg.p, cfg.noise_levels(which), cfg.block_fractions)
    noise = np.sqrt(sigma)[:, None] * rng.standard_normal((cfg.p, n))
    return DataMatrix(signal + noise)


def _run_trials(fn: Callable, seeds: Sequence, workers: int) -> list:
    """Map fn over seeds, in parallel when workers > 1, preserving seed order."""
    total = len(seeds)
    step = max(1, total // 10)

    def tracked(item):
        index, seed = item
        result = fn(seed)
        if (index + 1) % step == 0:
            logger.debug("Completed trial %d/%d", index + 1, total)
        return result

    items = list(enumerate(seeds))
    if workers > 1 and total > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(tracked, items))
    return [tracked(item) for item in items]


def _alignment_trial(cfg: SimConfig) -> Callable:
    def trial(seed) -> Optional[Tuple[float, float, float, np.ndarray]]:
        Y1 = generate_dataset(cfg, 1, seed)
        Y2 = generate_dataset(cfg, 2, seed)
        try:
            report = AnalysisService.align_test(Y1, Y2, cfg.r, cfg.c_penalty, cfg.alpha, cfg.center)
        except SpikeError as e:
            logger.warning("Trial failed: %s", e)
            return None
        v_delta = sum(est.covariances.v_pi for est in report.estimates)
        return report.t_stat, report.p_value, report.nmsd_hat, v_delta
    return trial


def run_null_calibration(cfg: SimConfig) -> CalibrationReport:
    """
    Run n_rep two-sample trials and compare T with its chi-square limit.

    Returns:
        CalibrationReport; empty (no rates) when n_rep is 0 or every trial failed
    """
    df = cfg.r - 1
    results = _run_trials(_alignment_trial(cfg), trial_seeds(cfg.master_seed, cfg.n_rep), cfg.workers)
    completed = [res for res in results if res is not None]
    report = CalibrationReport(
        n_rep=cfg.n_rep,
        n_failed=len(results) - len(completed),
        alpha=cfg.alpha,
        df=df,
    )
    if report.n_failed:
        logger.warning("%d of %d null trials failed", report.n_failed, cfg.n_rep)
    if not completed or df < 1:
        return report

    stats = np.array([res[0] for res in completed])
    p_values = np.array([res[1] for res in completed])
    report.t_stats = stats.tolist()
    report.empirical_size = float(np.mean(p_values < cfg.alpha))
    report.quantile_levels = list(QUANTILE_LEVELS)
    report.empirical_quantiles = [float(v) for v in np.quantile(stats, QUANTILE_LEVELS)]
    report.chi2_quantiles = [chi2_quantile(q, df) for q in QUANTILE_LEVELS]
    ks = kstest(stats, "chi2", args=(df,))
    report.ks_statistic = float(ks.statistic)
    report.ks_pvalue = float(ks.pvalue)
    return report


def pilot_v_delta(cfg: SimConfig) -> Optional[np.ndarray]:
    """Average plug-in V̂_Δ over n_pilot trials of the null design."""
    if cfg.n_pilot == 0:
        return None
    null_cfg = cfg.replace(d2=cfg.d1)
    seeds = trial_seeds(cfg.master_seed, cfg.n_pilot, PILOT_STREAM)
    results = [res for res in _run_trials(_alignment_trial(null_cfg), seeds, cfg.workers) if res]
    if not results:
        logger.warning("Every pilot trial failed; theoretical power unavailable")
        return None
    return np.mean([res[3] for res in results], axis=0)


def run_power_sweep(cfg: SimConfig, c_values: Sequence[float]) -> PowerReport:
    """
    Empirical and theoretical power as the first semi-axis of dataset 2 grows.

    The same trial seeds are reused for every c, so the sweep compares designs
    on common random numbers.
    """
    df = cfg.r - 1
    if df < 1:
        raise InvalidInput("Power sweep needs r >= 2")
    v_delta = pilot_v_delta(cfg)
    seeds = trial_seeds(cfg.master_seed, cfg.n_rep)
    report = PowerReport(alpha=cfg.alpha, n_rep=cfg.n_rep)

    for c in c_values:
        axes = alternative_axes(cfg.d1, c)
        delta = population_profile(cfg.d1).pi - population_profile(axes).pi
        if v_delta is None:
            lam, power_theory = None, None
        else:
            lam = noncentrality(delta, v_delta)
            power_theory = noncentral_chi2_power(lam, df, cfg.alpha)

        results = _run_trials(_alignment_trial(cfg.replace(d2=axes)), seeds, cfg.workers)
        completed = [res for res in results if res is not None]
        empirical = float(np.mean([res[1] < cfg.alpha for res in completed])) if completed else None
        report.rows.append(PowerRow(
            c=float(c),
            delta_norm=float(np.linalg.norm(delta)),
            lambda_theory=lam,
            power_theory=power_theory,
            power_empirical=empirical,
            n_failed=len(results) - len(completed),
        ))
        logger.debug("Power sweep c=%.3f: empirical=%s theory=%s", c, empirical, power_theory)
    return report


def run_noise_rate(cfg: SimConfig, n_values: Sequence[int], n_rep: int) -> NoiseRateReport:
    """
    Mean noise-estimation error (1/p)‖σ̂ - σ‖² of dataset 1 at each sample size,
    with the least-squares slope of log error on log N.
    """
    sigma = noise_vector(cfg.p, cfg.noise_levels_1, cfg.block_fractions)
    errors = []
    for n in n_values:
        design = cfg.replace(n1=int(n))

        def trial(seed, design=design):
            fit = estimate_noise(generate_dataset(design, 1, seed), cfg.r, cfg.c_penalty, cfg.center)
            return float(np.mean((fit.sigma - sigma) ** 2))

        seeds = trial_seeds(cfg.master_seed, n_rep, int(n))
        errors.append(float(np.mean(_run_trials(trial, seeds, cfg.workers))) if n_rep else float("nan"))

    slope = None
    finite = [(n, e) for n, e in zip(n_values, errors) if np.isfinite(e) and e > 0]
    if len(finite) >= 2:
        logs = np.log(np.array(finite, dtype=float))
        slope = float(np.polyfit(logs[:, 0], logs[:, 1], 1)[0])
    return NoiseRateReport(n_values=[int(n) for n in n_values], mean_errors=errors, slope=slope)


def run_variance_check(cfg: SimConfig, n_rep: int) -> VarianceCheckReport:
    """
    Compare the spread of λ̂₁ and Π̂ of dataset 1 over n_rep trials with the
    mean plug-in predictions.
    """
    def trial(seed):
        Y = generate_dataset(cfg, 1, seed)
        try:
            est = AnalysisService.estimate_profile(Y, cfg.r, cfg.c_penalty, cfg.center, dataset=1)
        except SpikeError as e:
            logger.warning("Trial failed: %s", e)
            return None
        return (
            est.spikes.lam[0],
            est.profile.pi,
            est.covariances.lambda_covariance[0, 0],
            est.covariances.v_pi,
        )

    results = _run_trials(trial, trial_seeds(cfg.master_seed, n_rep), cfg.workers)
    completed = [res for res in results if res is not None]
    if len(completed) < 2:
        raise InvalidInput("Variance check needs at least two completed trials")

    lam1 = np.array([res[0] for res in completed])
    pis = np.array([res[1] for res in completed])
    return VarianceCheckReport(
        n_rep=n_rep,
        n_failed=len(results) - len(completed),
        var_lambda1_empirical=float(np.var(lam1, ddof=1)),
        var_lambda1_plugin=float(np.mean([res[2] for res in completed])),
        cov_pi_empirical=np.cov(pis, rowvar=False),
        cov_pi_plugin=np.mean([res[3] for res in completed], axis=0),
    )


def export_dataset(cfg: SimConfig, seed: SeedLike, directory: str) -> List[str]:
    """Write both datasets of one trial as CSV files; return their paths."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for which in (1, 2):
        path = out / f"dataset_{which}.csv"
        write_matrix(str(path), generate_dataset(cfg, which, seed))
        paths.append(str(path))
    return paths
