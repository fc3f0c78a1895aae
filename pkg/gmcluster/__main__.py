# __main__.py
import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, Optional

import pydantic

import gmcluster
from gmcluster.core_processes.run_subcommands.run_green_subcommand import run_green_subcommand
from gmcluster.core_processes.run_subcommands.run_ground_state_subcommand import run_ground_state_subcommand
from gmcluster.core_processes.run_subcommands.run_nlep_subcommand import run_nlep_subcommand
from gmcluster.core_processes.run_subcommands.run_reduce_subcommand import run_reduce_subcommand
from gmcluster.core_processes.run_subcommands.run_simulate_subcommand import run_simulate_subcommand
from gmcluster.core_processes.run_subcommands.run_stability_subcommand import run_stability_subcommand
from gmcluster.core_processes.verify_all.run_verify_all import run_verify_all_subcommand
from gmcluster.data_layer.load_run_config import (
    SUBCOMMAND_PARAMETER_GROUPS,
    add_parameter_group_arguments,
    add_top_level_arguments,
    load_run_config,
    overrides_from_namespace,
)
from gmcluster.data_layer.run_config_models import RunConfig
from gmcluster.system.exceptions import GmClusterError, ValidationError
from gmcluster.system.logging.configure_logging import set_logging_level

logger = logging.getLogger(__name__)

EXIT_SUCCESS = 0

SUBCOMMAND_RUNNERS: Dict[str, Callable[[RunConfig], Dict[str, Any]]] = {
    "ground-state": run_ground_state_subcommand,
    "green": run_green_subcommand,
    "reduce": run_reduce_subcommand,
    "stability": run_stability_subcommand,
    "nlep": run_nlep_subcommand,
    "simulate": run_simulate_subcommand,
    "verify-all": run_verify_all_subcommand,
}

SUBCOMMAND_HELP = {
    "ground-state": "solve the radial ground state and its half-plane moments",
    "green": "tabulate the half-plane Green's kernel and its small-r expansion",
    "reduce": "solve the reduced force balance for k boundary spikes",
    "stability": "small-eigenvalue estimates of a solved cluster",
    "nlep": "nonlocal eigenvalue spectrum per angular mode and a τ sweep",
    "simulate": "integrate the full reaction-diffusion system from seeded boundary spikes",
    "verify-all": "run every acceptance check and write a verification report",
}


class UsageError(ValidationError):
    pass


class GmClusterArgumentParser(argparse.ArgumentParser):
    """Usage errors raise instead of exiting, so they map onto the validation exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> GmClusterArgumentParser:
    parser = GmClusterArgumentParser(
        prog=gmcluster.__package_name__,
        description=gmcluster.__description__,
        allow_abbrev=False,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {gmcluster.__version__}")
    subparsers = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    for name, groups in SUBCOMMAND_PARAMETER_GROUPS.items():
        subparser = subparsers.add_parser(name, help=SUBCOMMAND_HELP[name], allow_abbrev=False)
        add_top_level_arguments(subparser)
        for index, group in enumerate(groups):
            add_parameter_group_arguments(subparser, group, primary=index == 0)
    return parser


def _format_value(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.10g}"
    if isinstance(value, (list, tuple)):
        return " ".join(_format_value(item) for item in value)
    return str(value)


def summary_lines(summary: Dict[str, Any], prefix: str = "") -> List[str]:
    lines = []
    for key, value in summary.items():
        if isinstance(value, dict):
            lines += summary_lines(value, prefix=f"{prefix}{key}.")
        else:
            lines.append(f"{prefix}{key}: {_format_value(value)}")
    return lines


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        namespace = parser.parse_args(argv)
        if namespace.subcommand is None:
            parser.error("a subcommand is required")
        config = load_run_config(namespace.config_path, overrides_from_namespace(namespace))
        set_logging_level(config.verbosity)
        summary = SUBCOMMAND_RUNNERS[namespace.subcommand](config)
    except UsageError as error:
        print(error, file=sys.stderr)
        return error.exit_code
    except pydantic.ValidationError as error:
        logger.error(f"Invalid configuration:\n{error}")
        return ValidationError.exit_code
    except GmClusterError as error:
        logger.error(f"{type(error).__name__}: {error}")
        return error.exit_code

    print("\n".join(summary_lines(summary)))
    return EXIT_SUCCESS


if __name__ == "__main__":
    sys.exit(main())
