import argparse
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Type, Union

import toml
from pydantic.fields import SHAPE_SINGLETON, ModelField

from gmcluster.data_layer.run_config_models import ParametersModel, RunConfig
from gmcluster.system.exceptions import ValidationError

logger = logging.getLogger(__name__)

# The first group of each subcommand gets bare flags (`--k`), the others a group prefix (`--gs-grid-n`).
SUBCOMMAND_PARAMETER_GROUPS: Dict[str, Tuple[str, ...]] = {
    "ground-state": ("ground_state",),
    "green": ("green",),
    "reduce": ("cluster", "curve", "ground_state"),
    "stability": ("cluster", "curve", "ground_state"),
    "nlep": ("nlep", "ground_state"),
    "simulate": ("simulate", "curve", "ground_state"),
    "verify-all": ("verify", "ground_state", "green", "nlep"),
}

GROUP_FLAG_PREFIXES = {
    "curve": "curve-",
    "ground_state": "gs-",
    "green": "green-",
    "cluster": "cluster-",
    "nlep": "nlep-",
    "simulate": "sim-",
    "verify": "verify-",
}

FLAG_ALIASES = {
    "epsilon": ("--eps",),
    "diffusivity": ("--d",),
}

TOP_LEVEL_KEYS = ("output_folder", "random_seed", "verbosity")


def _argument_options(model_field: ModelField) -> Dict[str, Any]:
    if model_field.shape != SHAPE_SINGLETON:
        return {"nargs": "+", "type": model_field.type_, "metavar": model_field.name.upper()}
    if model_field.type_ is bool:
        return {"action": argparse.BooleanOptionalAction}
    return {"type": model_field.type_, "metavar": model_field.name.upper()}


def add_parameter_group_arguments(parser: argparse.ArgumentParser, group: str, primary: bool):
    model: Type[ParametersModel] = RunConfig.__fields__[group].type_
    prefix = "" if primary else GROUP_FLAG_PREFIXES[group]
    argument_group = parser.add_argument_group(f"[{group}]")
    for name, model_field in model.__fields__.items():
        flags = [f"--{prefix}{name.replace('_', '-')}"]
        if primary:
            flags += list(FLAG_ALIASES.get(name, ()))
        default = model_field.default if model_field.default_factory is None else model_field.default_factory()
        help_text = model_field.field_info.description or ""
        argument_group.add_argument(
            *flags,
            dest=f"{group}.{name}",
            default=argparse.SUPPRESS,
            help=f"{help_text} (default: {default})".strip(),
            **_argument_options(model_field),
        )


def add_top_level_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--config", dest="config_path", type=Path, default=None, help="TOML file of [group] tables")
    parser.add_argument("--output-folder", dest="output_folder", default=argparse.SUPPRESS)
    parser.add_argument("--random-seed", dest="random_seed", type=int, default=argparse.SUPPRESS)
    parser.add_argument("--verbosity", dest="verbosity", default=argparse.SUPPRESS)


def overrides_from_namespace(namespace: argparse.Namespace) -> Dict[str, Any]:
    """Nested {group: {key: value}} dictionary of the flags actually given on the command line."""
    overrides: Dict[str, Any] = {}
    for key, value in vars(namespace).items():
        if "." in key:
            group, name = key.split(".", 1)
            overrides.setdefault(group, {})[name] = value
        elif key in TOP_LEVEL_KEYS:
            overrides[key] = value
    return overrides


def read_config_file(config_path: Union[str, Path]) -> Dict[str, Any]:
    config_path = Path(config_path)
    if not config_path.is_file():
        raise ValidationError(f"Config file not found: {config_path}")
    try:
        contents = toml.load(config_path)
    except toml.TomlDecodeError as error:
        raise ValidationError(f"Could not parse config file {config_path}: {error}")
    logger.debug(f"Read config file {config_path}: {contents}")
    return contents


def _merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_run_config(
    config_path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """
    Model defaults, then the TOML file, then command-line overrides.

    Raises pydantic's ValidationError for out-of-range values, ours for an unreadable file.
    """
    raw = read_config_file(config_path) if config_path is not None else {}
    run_config = RunConfig.parse_obj(_merge(raw, overrides or {}))
    logger.debug(f"Resolved run config: {run_config.dict()}")
    return run_config