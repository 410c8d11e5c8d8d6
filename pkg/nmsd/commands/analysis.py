"""
Analysis commands.

Handlers for the noise, profile, distance and test subcommands. Each loads its
CSV inputs, calls the analysis service and returns a CommandOutput.
"""

from argparse import Namespace
from typing import Any, Dict, List

from nmsd.commands.output import CommandOutput
from nmsd.core.alignability import chi2_tail_bound
from nmsd.core.linalg import delocalization_diagnostic
from nmsd.core.noise import estimate_noise
from nmsd.core.parser import load_matrix
from nmsd.models.data import DataMatrix
from nmsd.services.analysis_service import AnalysisService


def load_input(args: Namespace, path: str) -> DataMatrix:
    """Load a data matrix honoring --header and --transpose."""
    return load_matrix(path, has_header=args.header, transpose=args.transpose)


def use_centering(args: Namespace) -> bool:
    """Analysis commands center unless --no-center was given."""
    return True if args.center is None else args.center


def run_noise(args: Namespace) -> CommandOutput:
    """Fit the piecewise-constant noise model of one dataset."""
    Y = load_input(args, args.data)
    center = use_centering(args)
    noise = estimate_noise(Y, args.rank, args.penalty_c, center=center)
    results = noise.to_dict()
    results.update({"p": Y.p, "n": Y.n, "n_segments": noise.n_segments})
    rows = [
        {"feature": a + 1, "residual": float(raw), "sigma": float(s)}
        for a, (raw, s) in enumerate(zip(noise.raw, noise.sigma))
    ]
    return CommandOutput(results=results, rows=rows, config={"center": center})


def run_profile(args: Namespace) -> CommandOutput:
    """Estimate the spectral profile of one dataset, with intervals on --ci."""
    Y = load_input(args, args.data)
    center = use_centering(args)
    estimate = AnalysisService.estimate_profile(
        Y, args.rank, args.penalty_c, center, with_covariance=args.ci
    )
    results = estimate.to_dict()
    results["diagnostics"] = {
        "delocalization": delocalization_diagnostic(estimate.spikes.eigenvectors).tolist(),
    }

    rows: List[Dict[str, Any]] = []
    for k in range(estimate.spikes.r):
        rows.append({
            "k": k + 1,
            "lambda": estimate.spikes.lam[k],
            "xi_hat": estimate.spikes.xi_hat[k],
            "d2_hat": estimate.spikes.d2_hat[k],
            "pi": estimate.profile.pi[k],
        })

    if args.ci:
        intervals = AnalysisService.profile_intervals(estimate, args.alpha)
        results["intervals"] = intervals.to_dict()
        for row, (low, high) in zip(rows, intervals.profile):
            row.update({"ci_low": low, "ci_high": high})
    return CommandOutput(results=results, rows=rows, config={"center": center})


def run_distance(args: Namespace) -> CommandOutput:
    """Distance between the profiles of two datasets, with an interval on --ci."""
    Y1 = load_input(args, args.first)
    Y2 = load_input(args, args.second)
    center = use_centering(args)

    if not args.ci:
        value = AnalysisService.distance(Y1, Y2, args.rank, args.penalty_c, center)
        return CommandOutput(
            results={"nmsd": value},
            rows=[{"nmsd": value}],
            config={"center": center},
        )

    report = AnalysisService.align_test(Y1, Y2, args.rank, args.penalty_c, args.alpha, center)
    interval = report.intervals.nmsd_interval
    results = {
        "nmsd": report.nmsd_hat,
        "profile_1": report.estimates[0].profile.pi.tolist(),
        "profile_2": report.estimates[1].profile.pi.tolist(),
        "intervals": report.intervals.to_dict(),
    }
    row = {
        "nmsd": report.nmsd_hat,
        "ci_low": None if interval is None else interval[0],
        "ci_high": None if interval is None else interval[1],
    }
    return CommandOutput(
        results=results, rows=[row], warnings=list(report.warnings), config={"center": center}
    )


def run_test(args: Namespace) -> CommandOutput:
    """Two-sample alignability test."""
    Y1 = load_input(args, args.first)
    Y2 = load_input(args, args.second)
    center = use_centering(args)
    report = AnalysisService.align_test(Y1, Y2, args.rank, args.penalty_c, args.alpha, center)

    results = report.to_dict()
    if report.df >= 1:
        results["p_value_bound"] = chi2_tail_bound(report.t_stat, report.df)
    rows = [
        {
            "k": k + 1,
            "pi_1": report.estimates[0].profile.pi[k],
            "pi_2": report.estimates[1].profile.pi[k],
            "delta": report.delta_pi[k],
            "delta_low": low,
            "delta_high": high,
        }
        for k, (low, high) in enumerate(report.intervals.delta)
    ]
    return CommandOutput(
        results=results, rows=rows, warnings=list(report.warnings), config={"center": center}
    )
