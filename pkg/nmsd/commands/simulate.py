"""
Simulate command.

Builds a SimConfig from the defaults, an optional config file and command-line
flags (in that order of precedence, lowest first) and runs one experiment.
"""

import logging
from argparse import Namespace
from typing import Any, Dict

from nmsd.commands.output import CommandOutput
from nmsd.config import load_config_file
from nmsd.core.linalg import derive_seed
from nmsd.models.simulation import SimConfig
from nmsd.services import simulation_service

logger = logging.getLogger(__name__)

EXPERIMENTS = ("null", "power", "noise-rate", "variance", "export")
DEFAULT_C_VALUES = (1.00, 1.05, 1.10, 1.20, 1.30, 1.50)
DEFAULT_N_VALUES = (1000, 2000, 4000, 8000)
DEFAULT_REPS = {"noise-rate": 30, "variance": 400}


def build_config(args: Namespace) -> SimConfig:
    """Merge config file values and explicit flags into a SimConfig."""
    values: Dict[str, Any] = load_config_file(args.config) if args.config else {}
    overrides = {
        "r": args.rank,
        "c_penalty": args.penalty_c,
        "alpha": args.alpha,
        "master_seed": args.seed,
        "n_rep": args.reps,
        "center": args.center,
        "workers": args.workers,
    }
    values.update({key: value for key, value in overrides.items() if value is not None})
    return SimConfig.from_dict(values)


def run_simulate(args: Namespace) -> CommandOutput:
    """Run the experiment selected by --experiment."""
    cfg = build_config(args)
    experiment = args.experiment
    logger.debug("Running %s experiment with %s", experiment, cfg.to_dict())
    echo: Dict[str, Any] = {"experiment": experiment, "sim": cfg.to_dict()}

    if experiment == "null":
        report = simulation_service.run_null_calibration(cfg)
        warnings = [f"{report.n_failed} of {report.n_rep} trials failed"] if report.n_failed else []
        return CommandOutput(
            results=report.to_dict(), rows=report.to_rows(), warnings=warnings, config=echo
        )

    if experiment == "power":
        c_values = args.c_values or list(DEFAULT_C_VALUES)
        echo["c_values"] = c_values
        report = simulation_service.run_power_sweep(cfg, c_values)
        failed = sum(row.n_failed for row in report.rows)
        warnings = [f"{failed} trials failed across the sweep"] if failed else []
        return CommandOutput(
            results=report.to_dict(), rows=report.to_rows(), warnings=warnings, config=echo
        )

    if experiment == "noise-rate":
        n_values = args.n_values or list(DEFAULT_N_VALUES)
        reps = args.reps if args.reps is not None else DEFAULT_REPS[experiment]
        echo.update({"n_values": n_values, "reps": reps})
        report = simulation_service.run_noise_rate(cfg, n_values, reps)
        return CommandOutput(results=report.to_dict(), rows=report.to_rows(), config=echo)

    if experiment == "variance":
        reps = args.reps if args.reps is not None else DEFAULT_REPS[experiment]
        echo["reps"] = reps
        report = simulation_service.run_variance_check(cfg, reps)
        warnings = [f"{report.n_failed} of {reps} trials failed"] if report.n_failed else []
        return CommandOutput(
            results=report.to_dict(), rows=report.to_rows(), warnings=warnings, config=echo
        )

    echo["export_dir"] = args.export_dir
    paths = simulation_service.export_dataset(cfg, derive_seed(cfg.master_seed, 0), args.export_dir)
    return CommandOutput(
        results={"files": paths, "p": cfg.p, "n1": cfg.n1, "n2": cfg.n2},
        rows=[{"dataset": i, "path": path} for i, path in enumerate(paths, start=1)],
        config=echo,
    )
