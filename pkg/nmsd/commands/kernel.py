"""Kernel command: compare two datasets through centered Gram spectra."""

import logging
from argparse import Namespace
from typing import List

import numpy as np

from nmsd.commands.analysis import load_input
from nmsd.commands.output import CommandOutput
from nmsd.core.errors import InvalidInput
from nmsd.core.kernel import kernel_profile, linear_gram, median_bandwidth, rbf_gram
from nmsd.core.spikes import nmsd
from nmsd.models.data import DataMatrix, GramMatrix

logger = logging.getLogger(__name__)


def build_grams(args: Namespace, X1: DataMatrix, X2: DataMatrix):
    """
    Build both Gram matrices for the requested kernel.

    Returns:
        Tuple (K1, K2, bandwidth); bandwidth is None unless the kernel is rbf
    """
    if args.kernel == "precomputed":
        return GramMatrix(X1.values), GramMatrix(X2.values), None
    if args.kernel == "linear":
        return linear_gram(X1), linear_gram(X2), None

    if X1.p != X2.p:
        raise InvalidInput(f"Datasets have different feature counts: {X1.p} and {X2.p}")
    bandwidth = args.bandwidth
    if bandwidth is None:
        pooled = DataMatrix(np.hstack([X1.values, X2.values]))
        bandwidth = median_bandwidth(pooled)
        logger.debug("Median-distance bandwidth %.4g", bandwidth)
    return rbf_gram(X1, bandwidth), rbf_gram(X2, bandwidth), bandwidth


def run_kernel(args: Namespace) -> CommandOutput:
    """Kernel spectral profiles of two datasets and their distance."""
    X1 = load_input(args, args.first)
    X2 = load_input(args, args.second)
    K1, K2, bandwidth = build_grams(args, X1, X2)

    warnings: List[str] = []
    first = kernel_profile(K1, args.rank, warnings)
    second = kernel_profile(K2, args.rank, warnings)
    distance = nmsd(first, second)

    results = {
        "kernel": args.kernel,
        "bandwidth": bandwidth,
        "profile_1": first.pi.tolist(),
        "profile_2": second.pi.tolist(),
        "nmsd": distance,
    }
    rows = [
        {"k": k + 1, "pi_1": a, "pi_2": b}
        for k, (a, b) in enumerate(zip(first.pi, second.pi))
    ]
    return CommandOutput(
        results=results,
        rows=rows,
        warnings=warnings,
        config={"kernel": args.kernel, "bandwidth": bandwidth},
    )
