"""Command-line entry point."""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from nmsd import __version__, config
from nmsd.commands.analysis import run_distance, run_noise, run_profile, run_test
from nmsd.commands.kernel import run_kernel
from nmsd.commands.output import emit, render
from nmsd.commands.simulate import EXPERIMENTS, run_simulate
from nmsd.core.errors import DataError, NmsdError, NumericalError
from nmsd.models.results import ReportEnvelope

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def _float_list(raw: str) -> List[float]:
    try:
        return [float(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {raw!r}")


def _int_list(raw: str) -> List[int]:
    try:
        return [int(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subparser per command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--penalty-c", type=float, default=None,
                        help=f"Potts penalty constant (default {config.DEFAULT_PENALTY_C:g})")
    common.add_argument("--alpha", type=float, default=None,
                        help=f"test and interval level (default {config.DEFAULT_ALPHA:g})")
    common.add_argument("--center", action=argparse.BooleanOptionalAction, default=None,
                        help="center features before forming covariances")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--log-level", type=str.upper, default=None,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
                        help="logging level (default from NMSD_LOG_LEVEL)")

    files = argparse.ArgumentParser(add_help=False)
    files.add_argument("--header", action="store_true", help="CSV files start with a header row")
    files.add_argument("--transpose", action="store_true", help="CSV rows are samples")

    ranked = argparse.ArgumentParser(add_help=False)
    ranked.add_argument("--rank", type=int, required=True, help="working rank r")

    parser = argparse.ArgumentParser(
        prog="nmsd",
        description="Spectral-profile distance and alignability testing for noisy datasets",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    noise = sub.add_parser("noise", parents=[common, files, ranked], help="fit the noise model")
    noise.add_argument("data")
    noise.set_defaults(func=run_noise)

    prof = sub.add_parser("profile", parents=[common, files, ranked], help="estimate a spectral profile")
    prof.add_argument("data")
    prof.add_argument("--ci", action="store_true", help="add confidence intervals")
    prof.set_defaults(func=run_profile)

    dist = sub.add_parser("distance", parents=[common, files, ranked], help="distance between two profiles")
    dist.add_argument("first")
    dist.add_argument("second")
    dist.add_argument("--ci", action="store_true", help="add confidence intervals")
    dist.set_defaults(func=run_distance)

    test = sub.add_parser("test", parents=[common, files, ranked], help="two-sample alignability test")
    test.add_argument("first")
    test.add_argument("second")
    test.set_defaults(func=run_test)

    kern = sub.add_parser("kernel", parents=[common, files, ranked], help="kernel profile distance")
    kern.add_argument("first")
    kern.add_argument("second")
    kern.add_argument("--kernel", choices=("linear", "rbf", "precomputed"), default="linear")
    kern.add_argument("--bandwidth", type=float, default=None,
                      help="rbf bandwidth (default: median pairwise distance)")
    kern.set_defaults(func=run_kernel)

    sim = sub.add_parser("simulate", parents=[common], help="run a simulation experiment")
    sim.add_argument("--experiment", choices=EXPERIMENTS, default="null")
    sim.add_argument("--config", help="key = value or YAML config file")
    sim.add_argument("--rank", type=int, default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--reps", type=int, default=None)
    sim.add_argument("--workers", type=int, default=None)
    sim.add_argument("--c-values", type=_float_list, default=None,
                     help="anisotropy factors for the power sweep")
    sim.add_argument("--n-values", type=_int_list, default=None,
                     help="sample sizes for the noise-rate experiment")
    sim.add_argument("--export-dir", default=".", help="directory for exported CSV files")
    sim.set_defaults(func=run_simulate)
    return parser


def _apply_defaults(args: argparse.Namespace) -> None:
    if args.command != "simulate":
        if args.penalty_c is None:
            args.penalty_c = config.DEFAULT_PENALTY_C
        if args.alpha is None:
            args.alpha = config.DEFAULT_ALPHA


def _config_echo(args: argparse.Namespace, extra: Dict[str, Any]) -> Dict[str, Any]:
    echo = {k: v for k, v in vars(args).items() if k not in ("func",)}
    echo.update(extra)
    return echo


def dispatch(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run one command and write its report.

    Returns:
        Exit code: 0 success, 2 usage, 3 data error, 4 numerical error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    config.configure_logging(args.log_level or config.LOG_LEVEL)
    _apply_defaults(args)
    logger.debug("Running command %s", args.command)

    try:
        output = args.func(args)
        envelope = ReportEnvelope(
            tool_version=__version__,
            command=args.command,
            config_echo=_config_echo(args, output.config),
            results=output.results,
            warnings=output.warnings,
        )
        emit(render(envelope, args.format, output.rows), args.out)
    except DataError as e:
        print(f"nmsd: error: {e}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as e:
        print(f"nmsd: error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NmsdError as e:
        print(f"nmsd: error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as e:
        print(f"nmsd: error: {e}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
