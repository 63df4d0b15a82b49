"""The ``fput-kdv`` command line."""

import argparse
import logging
import shlex
import sys
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from fput_kdv.exceptions import AliasingDetectedError, NonFiniteError
from fput_kdv.harness import ExperimentKind, ExperimentSpec, run_experiment
from fput_kdv.harness.output import version_string
from fput_kdv.settings import RuntimeSettings

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _name_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _common_arguments() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--epsilon", dest="epsilon_list", type=_float_list, help="Comma-separated epsilons in (0, 1).")
    parser.add_argument("--t0", dest="T0", type=float, help="Macroscopic horizon T0.")
    parser.add_argument(
        "--mass",
        dest="mass_models",
        type=_name_list,
        help="Comma-separated mass models: constant, periodic, transparent, iid, translucent.",
    )
    parser.add_argument("--seed", type=int, help="64-bit base seed.")
    parser.add_argument("--realizations", type=int, help="Ensemble size.")
    parser.add_argument("--out", dest="output_path", type=str, required=True, help="Output CSV path.")
    parser.add_argument("--dt", dest="dt_override", type=float, help="Fixed lattice time step.")
    parser.add_argument("--lattice-size", dest="M_override", type=int, help="Window half-width M.")
    parser.add_argument("--samples", type=int, help="Sample times per run.")
    parser.add_argument("--support-bound", dest="support_bound", type=float, help="Noise half-width a in (0, 1/4).")
    parser.add_argument("--theta", dest="theta_list", type=_float_list, help="Comma-separated AR(1) factors.")
    parser.add_argument("--length", type=int, help="AR(1) sequence length.")
    parser.add_argument("--spread-limit", dest="spread_limit", type=float, help="Residual-check flag ratio.")
    parser.add_argument("--wave", choices=["soliton", "zero"], help="Wave family of the residual check.")
    parser.add_argument("--timings", action="store_true", default=None, help="Record runtime_s.")
    parser.add_argument("--gnuplot", action="store_true", default=None, help="Write a .gp script per CSV.")
    parser.add_argument(
        "--log-level",
        dest="log_level",
        type=str.upper,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Overrides FPUT_KDV_LOG_LEVEL.",
    )
    return parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fput-kdv", description="FPUT lattice / KdV approximation experiments.")
    parser.add_argument("--version", action="version", version=version_string())
    commands = parser.add_subparsers(dest="command", required=True)
    common = _common_arguments()
    for kind in ExperimentKind:
        commands.add_parser(kind.value.replace("_", "-"), parents=[common])
    return parser


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    """Build the experiment spec; flags left out keep the spec defaults."""
    fields: Dict[str, Any] = {
        key: value
        for key, value in vars(args).items()
        if key not in ("command", "log_level") and value is not None
    }
    return ExperimentSpec(kind=ExperimentKind(args.command.replace("-", "_")), **fields)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and return the process exit code."""
    arguments = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(arguments)
    invocation = shlex.join(["fput-kdv", *arguments])
    try:
        runtime = RuntimeSettings()
        logging.basicConfig(
            level=(args.log_level or runtime.log_level).upper(),
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )
        spec = spec_from_args(args)
        run_experiment(spec, threads=runtime.threads, invocation=invocation)
    except (NonFiniteError, AliasingDetectedError) as err:
        _logger.error("Numerical abort: %s", err)
        return EXIT_NUMERICAL
    except ValidationError as err:
        _logger.error("Invalid arguments or runtime settings: %s", err)
        return EXIT_USAGE
    except ValueError as err:
        _logger.error("Invalid arguments: %s", err)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
